#include <doctest.h>

#include "coevo/helloworld.hpp"
#include "coevo/metamodel.hpp"

using namespace coevo;
using metamodel::Metamodel;
using metamodel::QualifiedName;

namespace {

Metamodel graph1() { return helloworld::graph1Metamodel(); }
Metamodel evolved() { return helloworld::graphEvolvedMetamodel(); }

} // namespace

TEST_CASE("qualified name parsing") {
    auto qn = QualifiedName::parse("Edge.src");
    CHECK(qn.type == "Edge");
    CHECK(qn.feature == "src");
    CHECK(qn.str() == "Edge.src");
    CHECK(QualifiedName::parse("Node").feature.empty());
    CHECK_THROWS_AS(QualifiedName::parse(""), ParseError);
    CHECK_THROWS_AS(QualifiedName::parse("A."), ParseError);
    CHECK_THROWS_AS(QualifiedName::parse(".b"), ParseError);
    CHECK_THROWS_AS(QualifiedName::parse("A.b.c"), ParseError);
}

TEST_CASE("validateMetamodel accepts the graph fixture") {
    CHECK(metamodel::validateMetamodel(graph1()).empty());
    CHECK(metamodel::validateMetamodel(evolved()).empty());
    CHECK(metamodel::validateMetamodel(helloworld::graph2Metamodel()).empty());
    CHECK(metamodel::validateMetamodel(helloworld::resultMetamodel()).empty());
    CHECK(metamodel::validateMetamodel(helloworld::shapesMetamodel()).empty());
}

TEST_CASE("validateMetamodel reports one violation per inheritance cycle") {
    auto mm = graph1();
    mm.findClass("Node")->superTypes = {"Edge"};
    mm.findClass("Edge")->superTypes = {"Node"};
    auto violations = metamodel::validateMetamodel(mm);
    REQUIRE(violations.size() == 1);
    CHECK(violations.front().message.find("cycle") != std::string::npos);
}

TEST_CASE("validateMetamodel reports unresolved reference targets") {
    auto mm = graph1();
    mm.findClass("Edge")->findReference("src")->target = "Nodee";
    auto violations = metamodel::validateMetamodel(mm);
    REQUIRE(violations.size() == 1);
    CHECK(violations.front().where.str() == "Edge.src");
    CHECK(violations.front().message.find("Nodee") != std::string::npos);
}

TEST_CASE("validateMetamodel covers names, bounds, literals, opposites") {
    SUBCASE("duplicate type names") {
        auto mm = graph1();
        mm.enumerations.push_back({"Node", {"X"}});
        CHECK(metamodel::validateMetamodel(mm).size() == 1);
    }
    SUBCASE("bad bounds") {
        auto mm = graph1();
        mm.findClass("Node")->findAttribute("name")->lower = 2;
        CHECK(metamodel::validateMetamodel(mm).size() == 1);
        mm.findClass("Node")->findAttribute("name")->lower = -1;
        CHECK_FALSE(metamodel::validateMetamodel(mm).empty());
    }
    SUBCASE("empty and duplicate literals") {
        auto mm = helloworld::shapesMetamodel();
        mm.findEnum("Kind")->literals = {};
        CHECK(metamodel::validateMetamodel(mm).size() == 1);
        mm.findEnum("Kind")->literals = {"A", "A"};
        CHECK(metamodel::validateMetamodel(mm).size() == 1);
    }
    SUBCASE("inherited feature clash") {
        auto mm = evolved();
        mm.findClass("Node")->attributes.push_back({"text", "String", 0, 1});
        auto violations = metamodel::validateMetamodel(mm);
        CHECK_FALSE(violations.empty());
    }
    SUBCASE("opposite must point back") {
        auto mm = graph1();
        mm.findClass("Edge")->findReference("src")->opposite = "trg";
        CHECK_FALSE(metamodel::validateMetamodel(mm).empty());
    }
    SUBCASE("consistent opposite pair is fine") {
        auto mm = graph1();
        mm.findClass("Edge")->findReference("src")->opposite = "outgoing";
        metamodel::Reference back;
        back.name = "outgoing";
        back.target = "Edge";
        back.lower = 0;
        back.upper = metamodel::kUnbounded;
        back.opposite = "src";
        mm.findClass("Node")->references.push_back(back);
        CHECK(metamodel::validateMetamodel(mm).empty());
    }
}

TEST_CASE("resolve finds classes, features, enums, literals") {
    auto mm = graph1();
    CHECK(metamodel::resolve(mm, {"Node", ""}).kind == metamodel::ResolvedElement::Kind::Class);
    auto src = metamodel::resolve(mm, {"Edge", "src"});
    CHECK(src.kind == metamodel::ResolvedElement::Kind::Reference);
    CHECK(src.reference->target == "Node");
    CHECK_THROWS_AS(metamodel::resolve(mm, {"Node", "missing"}), NotFoundError);
    CHECK_THROWS_AS(metamodel::resolve(mm, {"Nope", ""}), NotFoundError);

    auto shapes = helloworld::shapesMetamodel();
    CHECK(metamodel::resolve(shapes, {"Kind", ""}).kind ==
          metamodel::ResolvedElement::Kind::Enum);
    auto lit = metamodel::resolve(shapes, {"Kind", "CIRCLE"});
    CHECK(lit.kind == metamodel::ResolvedElement::Kind::Literal);
    CHECK(lit.literal == "CIRCLE");
}

TEST_CASE("resolve sees inherited features with the declaring owner") {
    auto mm = evolved();
    auto text = metamodel::resolve(mm, {"Node", "text"});
    CHECK(text.kind == metamodel::ResolvedElement::Kind::Attribute);
    CHECK(text.cls->name == "GraphComponent");
}

TEST_CASE("isSubtypeOf is the reflexive-transitive closure of superTypes") {
    auto mm = evolved();
    CHECK(metamodel::isSubtypeOf(mm, "Node", "GraphComponent"));
    CHECK(metamodel::isSubtypeOf(mm, "Node", "Node"));
    CHECK_FALSE(metamodel::isSubtypeOf(mm, "GraphComponent", "Node"));
    CHECK_THROWS_AS(metamodel::isSubtypeOf(mm, "Node", "Nope"), NotFoundError);

    // Properties over every class pair of the fixture: reflexivity,
    // transitivity, antisymmetry (the inheritance graph is acyclic).
    std::vector<std::string> names;
    for (const auto& c : mm.classes) names.push_back(c.name);
    for (const auto& a : names) {
        CHECK(metamodel::isSubtypeOf(mm, a, a));
        for (const auto& b : names) {
            if (a != b && metamodel::isSubtypeOf(mm, a, b))
                CHECK_FALSE(metamodel::isSubtypeOf(mm, b, a));
            for (const auto& c : names)
                if (metamodel::isSubtypeOf(mm, a, b) && metamodel::isSubtypeOf(mm, b, c))
                    CHECK(metamodel::isSubtypeOf(mm, a, c));
        }
    }
}

TEST_CASE("allFeatures: inherited first, declaration order, no duplicates") {
    auto mm = evolved();
    auto node = metamodel::allFeatures(mm, "Node");
    REQUIRE(node.size() == 1);
    CHECK(node[0].owner == "GraphComponent");
    CHECK(node[0].name() == "text");

    auto gc = metamodel::allFeatures(mm, "GraphComponent");
    REQUIRE(gc.size() == 1);
    CHECK(gc[0].owner == "GraphComponent");

    auto edge = metamodel::allFeatures(mm, "Edge");
    REQUIRE(edge.size() == 3);
    CHECK(edge[0].owner == "GraphComponent");
    CHECK(edge[0].name() == "text");
    CHECK(edge[1].name() == "src");
    CHECK(edge[2].name() == "trg");

    CHECK_THROWS_AS(metamodel::allFeatures(mm, "Nope"), NotFoundError);

    // allFeatures of a class is a superset of every supertype's features.
    for (const auto& c : mm.classes) {
        auto sub = metamodel::allFeatures(mm, c.name);
        for (const auto& super : c.superTypes) {
            for (const auto& f : metamodel::allFeatures(mm, super)) {
                bool found = false;
                for (const auto& g : sub)
                    if (g.owner == f.owner && g.name() == f.name()) found = true;
                CHECK(found);
            }
        }
    }
}

TEST_CASE("every qualified name formed from a valid metamodel resolves") {
    for (const auto& mm : {graph1(), evolved(), helloworld::resultMetamodel()}) {
        REQUIRE(metamodel::validateMetamodel(mm).empty());
        for (const auto& c : mm.classes) {
            CHECK_NOTHROW(metamodel::resolve(mm, {c.name, ""}));
            for (const auto& f : metamodel::allFeatures(mm, c.name))
                CHECK_NOTHROW(metamodel::resolve(mm, {c.name, f.name()}));
        }
        for (const auto& e : mm.enumerations) {
            CHECK_NOTHROW(metamodel::resolve(mm, {e.name, ""}));
            for (const auto& lit : e.literals)
                CHECK_NOTHROW(metamodel::resolve(mm, {e.name, lit}));
        }
    }
}

TEST_CASE("metamodel JSON round-trips canonically") {
    for (const auto& mm :
         {graph1(), evolved(), helloworld::graph2Metamodel(), helloworld::resultMetamodel(),
          helloworld::shapesMetamodel()}) {
        const std::string once = metamodel::printMetamodel(mm);
        const Metamodel back = metamodel::parseMetamodel(once);
        CHECK(back == mm);
        CHECK(metamodel::printMetamodel(back) == once);
    }
    CHECK_THROWS_AS(metamodel::parseMetamodel("{nope"), ParseError);
    CHECK_THROWS_AS(metamodel::parseMetamodel("{\"name\":\"X\"}"), ParseError);
}

TEST_CASE("renameElement fixes every mention of the old name") {
    SUBCASE("class rename updates targets and supers") {
        auto mm = evolved();
        metamodel::renameElement(mm, {"Node", ""}, "Vertex");
        CHECK(mm.findClass("Vertex"));
        CHECK_FALSE(mm.findClass("Node"));
        CHECK(mm.findClass("Edge")->findReference("src")->target == "Vertex");
        CHECK(metamodel::validateMetamodel(mm).empty());
    }
    SUBCASE("enum rename updates attribute types") {
        auto mm = helloworld::shapesMetamodel();
        metamodel::renameElement(mm, {"Kind", ""}, "ShapeSort");
        CHECK(mm.findClass("Shape")->findAttribute("kind")->type == "ShapeSort");
        CHECK(metamodel::validateMetamodel(mm).empty());
    }
    SUBCASE("reference rename updates the opposite back-pointer") {
        auto mm = graph1();
        mm.findClass("Edge")->findReference("src")->opposite = "outgoing";
        metamodel::Reference back;
        back.name = "outgoing";
        back.target = "Edge";
        back.lower = 0;
        back.upper = metamodel::kUnbounded;
        back.opposite = "src";
        mm.findClass("Node")->references.push_back(back);
        REQUIRE(metamodel::validateMetamodel(mm).empty());
        metamodel::renameElement(mm, {"Edge", "src"}, "from");
        CHECK(*mm.findClass("Node")->findReference("outgoing")->opposite == "from");
        CHECK(metamodel::validateMetamodel(mm).empty());
    }
}
