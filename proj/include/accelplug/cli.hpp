/*
 * Copyright 2026 The accelplug Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ACCELPLUG_CLI_HPP
#define ACCELPLUG_CLI_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "accelplug/accel_daemon.hpp"
#include "accelplug/types.hpp"

namespace accelplug {

/// "cpu-like", "gpu-like" or "custom:lanes,per_unit_cost,call_overhead".
AcceleratorProfile parse_profile(std::string_view text);

/// "auto" -> nullopt, otherwise a positive integer.
std::optional<std::size_t> parse_block_size(std::string_view text);

/// One line per vertex in ascending id order: "id value(s)".
void write_dump(std::ostream& out, const std::map<VertexId, AttributeValue>& attributes);

/// Entry point of the accelplug tool. Exit status: 0 converged (or command
/// succeeded), 2 iteration cap reached, 1 error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace accelplug

#endif  // ACCELPLUG_CLI_HPP
