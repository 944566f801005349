// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   acceptance [--cli PATH] [--only N]

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "textact/augmentation.hpp"
#include "textact/codec.hpp"
#include "textact/ensemble.hpp"
#include "textact/gateway.hpp"
#include "textact/harness.hpp"
#include "textact/image.hpp"
#include "textact/prompting.hpp"
#include "textact/random.hpp"
#include "textact/simenv.hpp"

namespace {

using namespace textact;
using json = nlohmann::json;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> check;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<Bounds> random_bounds(Rng& rng, int dims) {
  std::vector<Bounds> b;
  for (int j = 0; j < dims; ++j) {
    const double lo = rng.uniform(-3.0, 1.0);
    b.push_back({lo, lo + rng.uniform(0.01, 4.0)});
  }
  return b;
}

ActionChunk random_chunk_in(Rng& rng, const CodecConfig& cfg) {
  ActionChunk x(cfg.horizon, cfg.dims);
  for (int r = 0; r < cfg.horizon; ++r)
    for (int j = 0; j < cfg.dims; ++j) x(r, j) = rng.uniform(cfg.bounds[j].lo, cfg.bounds[j].hi);
  return x;
}

// ---- 1 ------------------------------------------------------------------------

Outcome codec_round_trip() {
  constexpr int kChunks = 10000;
  Rng rng(101);
  std::string detail;
  bool ok = true;
  for (int b : {250, 1000, 4000}) {
    CodecConfig cfg{8, 7, b, random_bounds(rng, 7)};
    double worst_ratio = 0.0;
    for (int i = 0; i < kChunks; ++i) {
      ActionChunk x = random_chunk_in(rng, cfg);
      if (i == 0) {
        for (int j = 0; j < cfg.dims; ++j) {
          x(0, j) = cfg.bounds[j].lo;
          x(1, j) = cfg.bounds[j].hi;
        }
      }
      const QuantizedChunk q = quantize(x, cfg);
      ok = ok && !q.clamped;
      const ActionChunk back = dequantize(q, cfg);
      for (int r = 0; r < cfg.horizon; ++r) {
        for (int j = 0; j < cfg.dims; ++j) {
          const double err = std::abs(back(r, j) - x(r, j));
          const double bound = cfg.max_error(j);
          ok = ok && err <= bound;
          worst_ratio = std::max(worst_ratio, err / bound);
        }
      }
    }
    detail += fmt("B=%d worst err/bound=%.6f; ", b, worst_ratio);
  }
  return {ok, detail + fmt("%d chunks per B", kChunks)};
}

// ---- 2 ------------------------------------------------------------------------

Outcome resolution_monotonicity() {
  Rng rng(202);
  const auto bounds = random_bounds(rng, 7);
  std::vector<ActionChunk> inputs;
  for (int i = 0; i < 2000; ++i) inputs.push_back(random_chunk_in(rng, {8, 7, 1000, bounds}));
  std::vector<double> max_err;
  for (int b : {250, 1000, 4000}) {
    const CodecConfig cfg{8, 7, b, bounds};
    double worst = 0.0;
    for (const auto& x : inputs) {
      const ActionChunk back = dequantize(quantize(x, cfg), cfg);
      for (std::size_t k = 0; k < x.flat().size(); ++k) worst = std::max(worst, std::abs(back.flat()[k] - x.flat()[k]));
    }
    max_err.push_back(worst);
  }
  const bool ok = max_err[2] <= max_err[1] && max_err[1] <= max_err[0];
  return {ok, fmt("max err B=250 %.3e, B=1000 %.3e, B=4000 %.3e", max_err[0], max_err[1], max_err[2])};
}

// ---- 3 ------------------------------------------------------------------------

Outcome prompt_fidelity() {
  const std::string p = build_system_prompt(8, 7, 1000);
  const std::string golden =
      "Analyze the input image and predict robot actions for the next 8 timesteps. Each action has 7 "
      "dimensions. Output a single sequence of 56 integers (0 - 1000 each), representing the 8 timesteps "
      "sequentially. Provide only space-separated numbers. Nothing else.";
  bool ok = p == golden;
  for (const char* clause : {"predict robot actions for the next 8 timesteps", "Each action has 7 dimensions",
                             "(0 - 1000 each)", "Provide only space-separated numbers. Nothing else."}) {
    ok = ok && p.find(clause) != std::string::npos;
  }
  return {ok, fmt("%zu bytes, %s", p.size(), ok ? "byte-identical to golden" : "differs from golden")};
}

// ---- 4 ------------------------------------------------------------------------

Outcome ensemble_oracle() {
  constexpr int kSequences = 1000;
  Rng rng(404);
  double worst = 0.0;
  long queries = 0;
  for (int s = 0; s < kSequences; ++s) {
    const int h = 1 + static_cast<int>(rng.below(16));
    const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(h)));
    const int d = 1 + static_cast<int>(rng.below(7));
    EnsembleBuffer buf({n, h});
    std::vector<std::pair<std::int64_t, ActionChunk>> history;
    std::int64_t t = static_cast<std::int64_t>(rng.below(3));
    const int pushes = 1 + static_cast<int>(rng.below(60));
    for (int k = 0; k < pushes; ++k) {
      ActionChunk c(h, d);
      for (auto& v : c.flat()) v = rng.uniform(-10.0, 10.0);
      history.emplace_back(t, c);
      buf.push(std::move(c), t);
      // Query every timestep until the next push.
      const std::int64_t next = t + 1 + static_cast<std::int64_t>(rng.bernoulli(0.3) ? rng.below(4) : 0);
      for (std::int64_t q = t; q < next; ++q) {
        std::vector<const std::pair<std::int64_t, ActionChunk>*> kept;
        for (auto it = history.rbegin(); it != history.rend() && static_cast<int>(kept.size()) < n; ++it) {
          if (q - it->first < h) kept.push_back(&*it);
        }
        if (kept.empty()) {
          if (buf.covers(q)) return {false, "buffer covers a timestep the brute force does not"};
          continue;
        }
        const auto got = buf.current_action(q);
        for (int j = 0; j < d; ++j) {
          double sum = 0.0;
          for (const auto* e : kept) sum += e->second(static_cast<std::size_t>(q - e->first), j);
          worst = std::max(worst, std::abs(got[j] - sum / static_cast<double>(kept.size())));
        }
        ++queries;
      }
      t = next;
    }
  }
  return {worst <= 1e-12, fmt("%d sequences, %ld queries, max |diff| %.3e", kSequences, queries, worst)};
}

// ---- 5 ------------------------------------------------------------------------

Outcome ensemble_direction() {
  RunConfig base;
  base.env.name = "pointmass";
  base.policy.kind = PolicyKind::NearestNeighbor;
  base.policy.demo_count = 100;
  base.policy.demo_seed = 1;
  base.policy.corruption.perturb_digit_prob = 0.1;
  base.policy.corruption.seed = 7;
  base.codec = default_codec("pointmass", 8, 1000);
  base.episodes = 200;
  base.seed = 2026;
  RunConfig n8 = base, n1 = base;
  n8.id = "n8";
  n8.ensemble = EnsembleConfig{8, 8};
  n1.id = "n1";
  n1.ensemble = EnsembleConfig{1, 8};
  const auto report = run_suite({n8, n1});
  const auto& a = report.rows[0];
  const auto& b = report.rows[1];
  const bool ok = a.success_rate - b.success_rate >= 0.0 && a.jitter < b.jitter;
  return {ok, fmt("success n=8 %.3f vs n=1 %.3f (delta %+.3f); jitter n=8 %.3e vs n=1 %.3e", a.success_rate,
                  b.success_rate, a.success_rate - b.success_rate, a.jitter, b.jitter)};
}

// ---- 6 ------------------------------------------------------------------------

std::string random_action_text(Rng& rng, int tokens, int b) {
  std::string s;
  for (int i = 0; i < tokens; ++i) {
    if (i) s += ' ';
    s += std::to_string(rng.below(static_cast<std::uint64_t>(b) + 1));
  }
  return s;
}

Outcome masking_statistics() {
  Rng rng(606);
  std::string detail;
  bool ok = true;
  for (double p : {0.1, 0.3, 0.5}) {
    std::size_t digits = 0, masked = 0;
    for (int i = 0; digits < 100000; ++i) {
      const std::string text = random_action_text(rng, 56, 1000);
      const std::string m = mask_action_text(text, {p, '#', mix_seed(606, static_cast<std::uint64_t>(i))});
      for (std::size_t k = 0; k < text.size(); ++k) {
        if (text[k] == ' ') {
          ok = ok && m[k] == ' ';
        } else {
          ++digits;
          masked += m[k] == '#';
        }
      }
    }
    const double rate = static_cast<double>(masked) / static_cast<double>(digits);
    ok = ok && std::abs(rate - p) <= 0.02;
    detail += fmt("p=%.1f rate %.4f over %zu digits; ", p, rate, digits);
  }
  int length_ok = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::string text = random_action_text(rng, 1 + static_cast<int>(rng.below(112)), 4000);
    const std::string m = mask_action_text(text, {rng.uniform(), '#', rng.next()});
    bool same = m.size() == text.size();
    for (std::size_t k = 0; same && k < text.size(); ++k) same = (text[k] == ' ') == (m[k] == ' ');
    length_ok += same;
  }
  ok = ok && length_ok == 10000;
  return {ok, detail + fmt("length/spaces preserved on %d/10000 strings", length_ok)};
}

// ---- 7 ------------------------------------------------------------------------

std::string mutate(Rng& rng, std::string s) {
  static const std::vector<std::string> kPieces = {
      "0", "7", "9", " ", "  ", "\t", "\n", "-", "+", ".", "e", "x", "#", ",", "\xe2\x88\x92", "\xc3\xa9",
      "99999999999999999999999", "-0", "1e3", "NaN", std::string(1, '\0'), "\xff"};
  const int edits = 1 + static_cast<int>(rng.below(4));
  for (int e = 0; e < edits; ++e) {
    const std::size_t pos = s.empty() ? 0 : static_cast<std::size_t>(rng.below(s.size() + 1));
    switch (rng.below(7)) {
      case 0: s.insert(pos, kPieces[rng.below(kPieces.size())]); break;
      case 1:
        if (!s.empty()) s.erase(std::min(pos, s.size() - 1), 1 + rng.below(3));
        break;
      case 2:
        if (!s.empty()) s[std::min(pos, s.size() - 1)] = static_cast<char>(rng.below(256));
        break;
      case 3: s = s.substr(0, pos); break;
      case 4: s += ' ' + std::to_string(rng.below(100000)); break;
      case 5: {
        const auto space = s.find(' ', pos);
        if (space != std::string::npos) s.erase(space, 1);
        break;
      }
      default: s.insert(pos, std::string(1 + rng.below(3), ' ')); break;
    }
  }
  return s;
}

Outcome parser_robustness() {
  constexpr int kMutations = 100000;
  Rng rng(707);
  int crashes = 0, accepted = 0, rejected = 0, out_of_range = 0;
  for (int i = 0; i < kMutations; ++i) {
    const int b = std::array{250, 1000, 4000}[rng.below(3)];
    const int h = 1 + static_cast<int>(rng.below(8));
    const int d = 1 + static_cast<int>(rng.below(7));
    const CodecConfig cfg{h, d, b, std::vector<Bounds>(static_cast<std::size_t>(d), Bounds{-1.0, 1.0})};
    const std::string text = mutate(rng, random_action_text(rng, h * d, b));
    try {
      const ParseResult r = parse_text(text, cfg);
      if (r) {
        ++accepted;
        const auto& v = r.chunk().values;
        if (v.rows() != static_cast<std::size_t>(h) || v.cols() != static_cast<std::size_t>(d)) ++out_of_range;
        for (auto x : v.flat()) out_of_range += x < 0 || x > b;
      } else {
        ++rejected;
      }
    } catch (...) {
      ++crashes;
    }
  }
  return {crashes == 0 && out_of_range == 0,
          fmt("%d mutations: %d accepted, %d ParseError, %d crashes, %d out-of-range", kMutations, accepted, rejected,
              crashes, out_of_range)};
}

// ---- 8 ------------------------------------------------------------------------

Outcome closed_loop_oracle() {
  bool ok = true;
  std::string detail;
  for (const char* env : {"pointmass", "arm"}) {
    RunConfig cfg;
    cfg.id = env;
    cfg.env.name = env;
    cfg.codec = default_codec(env, 8, 1000);
    cfg.ensemble = EnsembleConfig{8, 8};
    cfg.episodes = 100;
    cfg.seed = 808;
    const auto row = run_suite({cfg}).rows.front();
    const int successes = static_cast<int>(std::lround(row.success_rate * 100));
    ok = ok && successes >= 99 && row.parse_fail_rate == 0.0;
    detail += fmt("%s %d/100 parse_fail_rate %.3f; ", env, successes, row.parse_fail_rate);
  }
  return {ok, detail};
}

// ---- 9 ------------------------------------------------------------------------

std::string chunk_text_for(int t, int tokens) {
  std::string s;
  for (int k = 0; k < tokens; ++k) {
    if (k) s += ' ';
    s += std::to_string((t * 37 + k * 101) % 1001);
  }
  return s;
}

Outcome gateway_end_to_end() {
  constexpr int kSteps = 100;
  const CodecConfig codec{4, 2, 1000, {{-1.0, 1.0}, {-1.0, 1.0}}};

  StubVlmConfig stub_cfg;
  for (int t = 0; t < kSteps; ++t) {
    stub_cfg.script.push_back(t >= 10 && t < 20 ? "Sure! The robot should move left." : chunk_text_for(t, 8));
  }
  stub_cfg.by_instruction = {{"session alpha", {"0 0 0 0 0 0 0 0"}}, {"session beta", {"1000 1000 1000 1000 1000 1000 1000 1000"}}};
  StubVlmServer stub(stub_cfg);
  stub.bind("127.0.0.1", 0);
  stub.start();

  GatewayConfig gw_cfg;
  gw_cfg.backend.base_url = stub.base_url();
  gw_cfg.backend.timeout_ms = 5000;
  gw_cfg.codec = codec;
  gw_cfg.ensemble = {4, 4};
  Gateway gateway(gw_cfg);
  const int port = gateway.bind("127.0.0.1", 0);
  gateway.start();

  const std::string image = base64_encode(encode_png(RgbImage(16, 16)));
  auto body = [&](const std::string& session, int t, const std::string& instruction) {
    return json{{"session_id", session}, {"instruction", instruction}, {"images", {image}}, {"timestep", t}}.dump();
  };

  httplib::Client client("127.0.0.1", port);
  int well_formed = 0, server_errors = 0, held_ok = 0, parse_flags_ok = 0;
  std::vector<double> previous;
  for (int t = 0; t < kSteps; ++t) {
    const auto res = client.Post("/act", body("main", t, "pick up the block"), "application/json");
    if (!res) return {false, fmt("no response at step %d", t)};
    if (res->status >= 500) ++server_errors;
    if (res->status != 200) continue;
    const ActResponse r = act_response_from_json(json::parse(res->body));
    const bool finite = r.action.size() == 2 && std::isfinite(r.action[0]) && std::isfinite(r.action[1]);
    well_formed += finite && r.latency_ms >= 0.0;
    const bool garbage = t >= 10 && t < 20;
    parse_flags_ok += r.parse_ok == !garbage;
    if (garbage) held_ok += r.action == previous;
    previous = r.action;
  }

  // Two sessions with distinct constant backends, driven concurrently.
  std::atomic<int> mixed{0}, isolated_errors{0};
  auto drive = [&](const std::string& session, const std::string& instruction, double expect) {
    httplib::Client c("127.0.0.1", port);
    for (int t = 0; t < 50; ++t) {
      const auto res = c.Post("/act", body(session, t, instruction), "application/json");
      if (!res || res->status != 200) {
        ++isolated_errors;
        continue;
      }
      const auto action = json::parse(res->body)["action"].get<std::vector<double>>();
      if (action != std::vector<double>{expect, expect}) ++mixed;
    }
  };
  std::thread a(drive, "alpha", "session alpha", -1.0);
  std::thread b(drive, "beta", "session beta", 1.0);
  a.join();
  b.join();
  gateway.stop();
  stub.stop();

  const bool ok = well_formed == kSteps && server_errors == 0 && held_ok == 10 && parse_flags_ok == kSteps &&
                  mixed == 0 && isolated_errors == 0;
  return {ok, fmt("%d/%d well-formed, %d 5xx, %d/10 garbage steps held, parse_ok correct %d/%d, "
                  "interleaved sessions: %d mixed, %d errors",
                  well_formed, kSteps, server_errors, held_ok, parse_flags_ok, kSteps, mixed.load(),
                  isolated_errors.load())};
}

// ---- 10 -----------------------------------------------------------------------

int run_cli(const std::string& cli, const std::vector<std::string>& args) {
  const pid_t pid = ::fork();
  if (pid == 0) {
    std::vector<char*> argv;
    std::string exe = cli;
    argv.push_back(exe.data());
    std::vector<std::string> copy = args;
    for (auto& a : copy) argv.push_back(a.data());
    argv.push_back(nullptr);
    const int devnull = ::open("/dev/null", O_WRONLY);
    ::dup2(devnull, STDOUT_FILENO);
    ::execv(exe.c_str(), argv.data());
    ::_exit(127);
  }
  int status = 0;
  ::waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome demo_count(const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / ("textact_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  bool ok = true;
  std::string detail;
  for (const char* env : {"pointmass", "arm"}) {
    std::string a_bytes, b_bytes;
    std::vector<Episode> demos;
    if (!cli.empty()) {
      const auto a = (dir / (std::string(env) + "_a.jsonl")).string();
      const auto b = (dir / (std::string(env) + "_b.jsonl")).string();
      const int ca = run_cli(cli, {"gen-demos", "--env", env, "--count", "100", "--seed", "1", "--out", a});
      const int cb = run_cli(cli, {"gen-demos", "--env", env, "--count", "100", "--seed", "1", "--out", b});
      if (ca != 0 || cb != 0) {
        ok = false;
        detail += fmt("%s: gen-demos exited %d/%d; ", env, ca, cb);
        continue;
      }
      a_bytes = slurp(a);
      b_bytes = slurp(b);
      demos = read_episodes(fs::path(a));
    } else {
      std::ostringstream a, b;
      demos = generate_demos({env}, 100, 1);
      write_episodes(a, demos);
      write_episodes(b, generate_demos({env}, 100, 1));
      a_bytes = a.str();
      b_bytes = b.str();
    }
    int successes = 0;
    for (const auto& ep : demos) successes += ep.success;
    const bool env_ok = demos.size() == 100 && successes == 100 && a_bytes == b_bytes;
    ok = ok && env_ok;
    detail += fmt("%s %zu episodes, %d successful, reruns %s; ", env, demos.size(), successes,
                  a_bytes == b_bytes ? "identical" : "DIFFER");
  }
  fs::remove_all(dir);
  return {ok, detail + (cli.empty() ? "library" : "via CLI")};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--cli PATH] [--only N]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<Criterion> criteria = {
      {1, "codec round-trip", 5, codec_round_trip},
      {2, "resolution monotonicity", 5, resolution_monotonicity},
      {3, "prompt fidelity", 1, prompt_fidelity},
      {4, "ensemble oracle equivalence", 10, ensemble_oracle},
      {5, "ensemble ablation direction", 300, ensemble_direction},
      {6, "masking statistics", 10, masking_statistics},
      {7, "parser robustness", 30, parser_robustness},
      {8, "closed-loop oracle", 120, closed_loop_oracle},
      {9, "gateway end-to-end", 60, gateway_end_to_end},
      {10, "demo-count analog", 30, [&cli] { return demo_count(cli); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::printf("[%s] AC%-2d %-28s %6.2fs (limit %gs)  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.limit_s, out.detail.c_str(), in_time ? "" : "  TIME LIMIT EXCEEDED");
    std::fflush(stdout);
  }
  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
