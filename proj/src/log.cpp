// Copyright 2026 The TreeNeRV Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "treenerv/log.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace treenerv {

void init_logging(std::string_view level) {
  spdlog::level::level_enum lvl;
  if (level == "error") {
    lvl = spdlog::level::err;
  } else if (level == "info") {
    lvl = spdlog::level::info;
  } else if (level == "debug") {
    lvl = spdlog::level::debug;
  } else {
    throw std::invalid_argument("TREENERV_LOG must be error, info or debug, got '" +
                                std::string(level) + "'");
  }
  spdlog::drop("treenerv");
  auto logger = spdlog::stderr_logger_st("treenerv");
  logger->set_pattern("[%l] %v");
  logger->set_level(lvl);
  spdlog::set_default_logger(logger);
}

void init_logging() {
  const char* env = std::getenv("TREENERV_LOG");
  init_logging(env == nullptr ? "info" : env);
}

}  // namespace treenerv
