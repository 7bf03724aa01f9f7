// SPDX-License-Identifier: Apache-2.0
#include "log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <cstdlib>
#include <memory>
#include <optional>
#include <string_view>

namespace cvm {

namespace {

std::optional<spdlog::level::level_enum> parse_level(std::string_view name) {
    if (name == "error") return spdlog::level::err;
    if (name == "info") return spdlog::level::info;
    if (name == "debug") return spdlog::level::debug;
    return std::nullopt;
}

std::shared_ptr<spdlog::logger> make_logger() {
    auto logger = std::make_shared<spdlog::logger>("cvm", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    logger->set_pattern("[cvm %l] %v");
    logger->set_level(spdlog::level::err);
    if (const char *env = std::getenv("CVM_LOG")) {
        if (auto lvl = parse_level(env)) logger->set_level(*lvl);
    }
    return logger;
}

}  // namespace

spdlog::logger &log() {
    static std::shared_ptr<spdlog::logger> logger = make_logger();
    return *logger;
}

bool set_log_level(const char *name) {
    auto lvl = parse_level(name ? name : "");
    if (!lvl) return false;
    log().set_level(*lvl);
    return true;
}

}  // namespace cvm
