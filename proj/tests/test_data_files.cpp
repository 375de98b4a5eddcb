#include "support.hpp"

#include <filesystem>

#include "forge/aer.hpp"
#include "forge/compile_repair.hpp"
#include "forge/keywords.hpp"

using namespace forge;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string &rel) { return read_file(fs::path(FORGE_DATA_DIR) / rel); }

} // namespace

TEST_CASE("shipped keyword lists equal the built-in ones") {
    CHECK(data("keywords/cpp.txt") == cpp_keywords_text);
    CHECK(data("keywords/cuda.txt") == cuda_keywords_text);
    CHECK(data("keywords/fortran.txt") == fortran_keywords_text);
    for (auto l : all_languages) {
        CHECK(parse_keyword_list(data("keywords/" + std::string(to_string(l)) + ".txt")) == default_keywords(l));
    }
}

TEST_CASE("shipped tag tables round-trip") {
    CHECK(serialize_tagset(parse_tagset(data("aer/tags.txt"))) == serialize_tagset(default_tagset()));
    CHECK(serialize_tagset(parse_tagset(data("aer/tags_extended.txt"))) == serialize_tagset(extended_tagset()));
    CHECK(data("aer/c_family.map") == c_family_mapping_text);
    CHECK(data("aer/cuda_extra.map") == cuda_extra_mapping_text);
    CHECK(data("aer/fortran.map") == fortran_mapping_text);
}

TEST_CASE("shipped adapter files equal the built-in adapters") {
    for (const auto &a : builtin_adapters()) {
        INFO(a.name);
        const auto j = nlohmann::json::parse(data("adapters/" + a.name + ".json"));
        CHECK(j == to_json(a));
        CHECK(to_json(adapter_from_json(j)) == to_json(a));
    }
}
