// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <exception>

#include "common.hpp"
#include "textact/version.hpp"

int main(int argc, char** argv) {
  using namespace textact::cli;

  CLI::App app{"Text-action toolkit: demos, codecs, evaluation and serving for text-output robot policies"};
  app.set_version_flag("--version", std::string(textact::kVersion));
  app.require_subcommand(1);

  std::vector<Command> commands;
  add_gen_demos(app, commands);
  add_fit_bounds(app, commands);
  add_export_samples(app, commands);
  add_eval(app, commands);
  add_ablate(app, commands);
  add_serve(app, commands);
  add_stub_vlm(app, commands);
  add_codec_check(app, commands);
  add_mask_preview(app, commands);

  try {
    app.parse(argc, argv);
    for (const auto& cmd : commands) {
      if (cmd.app->parsed()) return cmd.run();
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
