// Replays recorded nvcc output. Usage: stub_nvcc <fixture-dir> <source>.
// A source equal to <name>.cu prints <name>.nvcc.txt and fails when that
// recording is non-empty; a source equal to <name>.fixed.cu compiles.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

static std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int main(int argc, char **argv) {
    if (argc != 3) {
        std::cerr << "usage: stub_nvcc <fixture-dir> <source>\n";
        return 2;
    }
    const auto source = slurp(argv[2]);
    for (const auto &e : fs::directory_iterator(argv[1])) {
        const auto name = e.path().filename().string();
        if (name.size() < 4 || name.substr(name.size() - 3) != ".cu" || slurp(e.path()) != source) continue;
        if (name.size() > 9 && name.substr(name.size() - 9) == ".fixed.cu") return 0;
        const auto log = slurp(e.path().parent_path() / (name.substr(0, name.size() - 3) + ".nvcc.txt"));
        std::cout << log;
        return log.empty() ? 0 : 1;
    }
    std::cout << "kernel.cu(1): error: no recording for this source\n";
    return 1;
}
