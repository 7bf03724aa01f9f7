// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <spdlog/spdlog.h>

namespace cvm {

/// Logger shared by the library; writes to stderr. Level comes from CVM_LOG
/// (error, info, debug) on first use, defaulting to error.
spdlog::logger &log();

/// Override the level; accepts the same names as CVM_LOG. Returns false on an unknown name.
bool set_log_level(const char *name);

}  // namespace cvm
