#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "opcascade/engine.hpp"
#include "opcascade/providers.hpp"

namespace testutil {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("opcascade-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline opcascade::Message make_message(std::string id, opcascade::Vector x, opcascade::Vector q, opcascade::Round round = 1,
                                       std::string platform = "p") {
    opcascade::Message m;
    m.id = id;
    m.cascade_id = id;
    m.author = "organization";
    m.platform = std::move(platform);
    m.round = round;
    m.content_embedding = std::move(x);
    m.emotion = std::move(q);
    return m;
}

}  // namespace testutil
