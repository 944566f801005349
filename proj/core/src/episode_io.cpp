// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "textact/episode.hpp"

namespace textact {

using json = nlohmann::json;

ActionChunk Episode::actions() const {
  ActionChunk out(steps.size(), static_cast<std::size_t>(dims));
  for (std::size_t t = 0; t < steps.size(); ++t) {
    if (steps[t].action.size() != static_cast<std::size_t>(dims)) {
      throw std::invalid_argument("episode step " + std::to_string(t) + " has wrong action size");
    }
    for (std::size_t d = 0; d < steps[t].action.size(); ++d) out(t, d) = steps[t].action[d];
  }
  return out;
}

void write_episodes(std::ostream& out, const std::vector<Episode>& episodes) {
  for (const auto& ep : episodes) {
    json header = {{"env", ep.env},
                   {"D", ep.dims},
                   {"seed", ep.seed},
                   {"instruction", ep.instruction},
                   {"success", ep.success},
                   {"steps", ep.steps.size()}};
    out << header.dump() << '\n';
    for (const auto& step : ep.steps) {
      json line = {{"state", step.state}, {"action", step.action}, {"t", step.t}};
      out << line.dump() << '\n';
    }
  }
}

void write_episodes(const std::filesystem::path& path, const std::vector<Episode>& episodes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_episodes(out, episodes);
}

std::vector<Episode> read_episodes(std::istream& in) {
  std::vector<Episode> out;
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> json {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        return json::parse(line);
      } catch (const json::exception& e) {
        throw std::runtime_error("episode file line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    return json();
  };

  try {
    for (json header = next_line(); !header.is_null(); header = next_line()) {
      Episode ep;
      ep.env = header.at("env").get<std::string>();
      ep.dims = header.at("D").get<int>();
      ep.seed = header.at("seed").get<std::uint64_t>();
      ep.instruction = header.value("instruction", std::string{});
      ep.success = header.value("success", true);
      const auto count = header.at("steps").get<std::size_t>();
      ep.steps.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        const json row = next_line();
        if (row.is_null()) throw std::runtime_error("episode file ends inside an episode");
        StepRecord step;
        step.t = row.at("t").get<std::int64_t>();
        step.state = row.at("state").get<std::vector<double>>();
        step.action = row.at("action").get<std::vector<double>>();
        if (step.action.size() != static_cast<std::size_t>(ep.dims)) {
          throw std::runtime_error("episode file line " + std::to_string(line_no) +
                                   ": action size does not match D");
        }
        ep.steps.push_back(std::move(step));
      }
      out.push_back(std::move(ep));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error("episode file line " + std::to_string(line_no) + ": " + e.what());
  }
  return out;
}

std::vector<Episode> read_episodes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_episodes(in);
}

}  // namespace textact
