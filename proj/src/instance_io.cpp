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

#include "coopcache/instance_io.hpp"

#include <fstream>

namespace coopcache {

using nlohmann::json;

json InstanceToJson(const Instance& instance) {
  json doc;
  doc["server"] = {{"u0", instance.server().u0}, {"alpha0", instance.server().alpha0}};
  doc["caches"] = json::array();
  for (const CacheSpec& c : instance.caches()) {
    doc["caches"].push_back(
        {{"id", c.id}, {"s", c.s}, {"u", c.u}, {"d", c.d}, {"alpha", c.alpha}, {"beta", c.beta}});
  }
  doc["m"] = instance.m();
  doc["demands"] = json::array();
  for (const Demand& d : instance.demands()) doc["demands"].push_back({d.cache, d.item, d.count});
  return doc;
}

Instance InstanceFromJson(const json& doc) {
  try {
    ServerSpec server;
    server.u0 = doc.at("server").at("u0").get<int64_t>();
    server.alpha0 = doc.at("server").at("alpha0").get<int64_t>();
    std::vector<CacheSpec> caches;
    for (const json& c : doc.at("caches")) {
      caches.push_back({c.at("id").get<int>(), c.at("s").get<int64_t>(), c.at("u").get<int64_t>(),
                        c.at("d").get<int64_t>(), c.at("alpha").get<int64_t>(),
                        c.at("beta").get<int64_t>()});
    }
    std::vector<Demand> demands;
    for (const json& d : doc.at("demands")) {
      if (!d.is_array() || d.size() != 3) throw InvalidInstance("demand entries are [cache, item, count]");
      demands.push_back({d[0].get<int>(), d[1].get<int>(), d[2].get<int64_t>()});
    }
    return Instance(server, std::move(caches), doc.at("m").get<int>(), std::move(demands));
  } catch (const json::exception& e) {
    throw InvalidInstance(std::string("instance JSON: ") + e.what());
  }
}

json SolutionToJson(const Solution& sol) {
  json doc;
  doc["y"] = json::array();
  for (const auto& [key, v] : sol.y) doc["y"].push_back({key.first, key.second, v});
  doc["x"] = json::array();
  for (const auto& [route, v] : sol.x) {
    doc["x"].push_back({route.source, route.requester, route.item, v});
  }
  return doc;
}

Solution SolutionFromJson(const json& doc) {
  Solution sol;
  for (const json& e : doc.at("y")) sol.y[{e.at(0).get<int>(), e.at(1).get<int>()}] = e.at(2).get<int64_t>();
  for (const json& e : doc.at("x")) {
    sol.x[Route{e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()}] = e.at(3).get<int64_t>();
  }
  return sol;
}

void WriteInstanceFile(const std::string& path, const Instance& instance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << InstanceToJson(instance).dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

Instance ReadInstanceFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidInstance(path + ": " + e.what());
  }
  return InstanceFromJson(doc);
}

}  // namespace coopcache
