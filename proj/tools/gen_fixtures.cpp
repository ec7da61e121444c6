// Writes the canonical fixture files (metamodels, the G_A model, and the two
// migration histories) into a directory, default ./fixtures.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "coevo/helloworld.hpp"

int main(int argc, char** argv) {
    std::filesystem::path dir = argc > 1 ? argv[1] : "fixtures";
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : coevo::helloworld::fixtureFiles()) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        if (!out) {
            std::cerr << "cannot write " << (dir / name).string() << "\n";
            return 1;
        }
        out << content;
        std::cout << (dir / name).string() << "\n";
    }
    return 0;
}
