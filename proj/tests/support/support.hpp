#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "todkit/corpus.hpp"
#include "todkit/schema.hpp"

namespace testsupport {

inline std::filesystem::path fixture(const std::string& rel = {}) {
    return std::filesystem::path(TODKIT_FIXTURE_DIR) / rel;
}

inline std::filesystem::path corpus_dir() { return fixture("corpus"); }

/// Fresh empty directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
    static std::atomic<int> counter{0};
    auto p = std::filesystem::path(TODKIT_TEST_TMP) / (name + "_" + std::to_string(counter++));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline const todkit::Corpus& corpus() {
    static const todkit::Corpus c = todkit::load_corpus(corpus_dir());
    return c;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& data) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << data;
}

}  // namespace testsupport
