#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "redwatch/trace.hpp"

namespace testutil {

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("redwatch_test_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const {
        return (path_ / name).string();
    }
    std::string dir() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

/// Constant-valued trace with the standard 13-event schema.
inline redwatch::Trace constant_trace(int n, double value,
                                      double interval_ms = 10.0) {
    redwatch::Trace t;
    t.label.workload = "const";
    t.source = "test";
    for (int i = 0; i < n; ++i) {
        redwatch::BehaviorSample s;
        s.t_ms = i * interval_ms;
        s.counts = Eigen::VectorXd::Constant(redwatch::kEventCount, value);
        t.samples.push_back(std::move(s));
    }
    return t;
}

}  // namespace testutil
