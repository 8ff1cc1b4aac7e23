// Copyright 2026 The coopcache Authors
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

#ifndef COOPCACHE_INSTANCE_IO_HPP_
#define COOPCACHE_INSTANCE_IO_HPP_

#include <string>

#include <json.hpp>

#include "coopcache/model.hpp"

namespace coopcache {

nlohmann::json InstanceToJson(const Instance& instance);
Instance InstanceFromJson(const nlohmann::json& doc);  // throws InvalidInstance

nlohmann::json SolutionToJson(const Solution& sol);
Solution SolutionFromJson(const nlohmann::json& doc);

void WriteInstanceFile(const std::string& path, const Instance& instance);
Instance ReadInstanceFile(const std::string& path);

}  // namespace coopcache

#endif  // COOPCACHE_INSTANCE_IO_HPP_
