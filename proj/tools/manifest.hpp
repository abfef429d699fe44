#pragma once

// Run manifest: config echo, library versions, seeds, wall times, check
// outcomes and a SHA-256 for every output file.

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace robinlap::cli {

std::string sha256_file(const std::filesystem::path& path);

class Manifest {
public:
    Manifest(std::filesystem::path dir, std::string command, nlohmann::json config, std::uint64_t seed);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    /// Path inside the output directory; the file is hashed when the manifest is written.
    std::filesystem::path output(const std::string& name, const std::string& description);

    void record(const std::string& key, nlohmann::json value) { results_[key] = std::move(value); }
    void check(const std::string& name, bool passed, nlohmann::json detail = {});
    bool all_passed() const noexcept { return all_passed_; }

    /// Accumulates wall time under `name` while the returned guard lives.
    class Timer {
    public:
        Timer(Manifest& m, std::string name) : m_(m), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
        ~Timer();
        Timer(const Timer&) = delete;
        Timer& operator=(const Timer&) = delete;

    private:
        Manifest& m_;
        std::string name_;
        std::chrono::steady_clock::time_point start_;
    };
    Timer time(std::string name) { return Timer(*this, std::move(name)); }

    /// Writes manifest.json; returns its path.
    std::filesystem::path write();

private:
    std::filesystem::path dir_;
    std::string command_;
    nlohmann::json config_;
    std::uint64_t seed_;
    std::vector<std::pair<std::string, std::string>> outputs_;
    nlohmann::json results_ = nlohmann::json::object();
    nlohmann::json checks_ = nlohmann::json::array();
    nlohmann::json times_ = nlohmann::json::object();
    bool all_passed_ = true;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

nlohmann::json versions();

} // namespace robinlap::cli
