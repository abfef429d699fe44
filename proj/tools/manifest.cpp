#include "manifest.hpp"

#include "robinlap/error.hpp"
#include "robinlap/kernels.hpp"

#include <Eigen/Core>
#include <fftw3.h>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#ifndef ROBINLAP_VERSION
#define ROBINLAP_VERSION "unknown"
#endif

namespace robinlap::cli {

std::string sha256_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::io_error, "cannot hash " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md;
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md.data(), &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

nlohmann::json versions()
{
    return {
        {"robinlap", ROBINLAP_VERSION},
        {"compiler", __VERSION__},
        {"fftw", std::string(fftw_version)},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"openssl", OPENSSL_VERSION_TEXT},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                              "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"threads", kernels::max_threads()},
    };
}

Manifest::Manifest(std::filesystem::path dir, std::string command, nlohmann::json config, std::uint64_t seed)
    : dir_(std::move(dir)), command_(std::move(command)), config_(std::move(config)), seed_(seed)
{
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec)
        throw Error(ErrorKind::io_error, "cannot create " + dir_.string() + ": " + ec.message());
}

std::filesystem::path Manifest::output(const std::string& name, const std::string& description)
{
    outputs_.emplace_back(name, description);
    return dir_ / name;
}

void Manifest::check(const std::string& name, bool passed, nlohmann::json detail)
{
    all_passed_ = all_passed_ && passed;
    nlohmann::json c = {{"name", name}, {"passed", passed}};
    if (!detail.is_null())
        c["detail"] = std::move(detail);
    checks_.push_back(std::move(c));
}

Manifest::Timer::~Timer()
{
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    auto& slot = m_.times_[name_];
    slot = (slot.is_number() ? slot.get<double>() : 0.0) + s;
}

std::filesystem::path Manifest::write()
{
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [name, description] : outputs_) {
        const auto path = dir_ / name;
        files.push_back({{"file", name},
                         {"description", description},
                         {"bytes", std::filesystem::file_size(path)},
                         {"sha256", sha256_file(path)}});
    }
    times_["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const nlohmann::json m = {
        {"command", command_}, {"config", config_},   {"seed", seed_},         {"versions", versions()},
        {"wall_seconds", times_}, {"results", results_}, {"checks", checks_}, {"all_passed", all_passed_},
        {"outputs", files},
    };
    const auto path = dir_ / "manifest.json";
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::io_error, "cannot write " + path.string());
    out << std::setw(2) << m << '\n';
    if (!out)
        throw Error(ErrorKind::io_error, "write failed for " + path.string());
    return path;
}

} // namespace robinlap::cli
