#include "commands.hpp"

#include <cstdio>
#include <exception>

int main(int argc, char** argv) {
  using namespace jumpopt;
  CLI::App app{"Omnidirectional jump trajectory optimization"};
  app.name("jumpopt");
  app.require_subcommand(1);
  app.set_version_flag("--version", "jumpopt 1.0.0");

  std::vector<Command> commands;
  register_optimize(app, commands);
  register_simulate(app, commands);
  register_bench(app, commands);
  register_premotion(app, commands);
  register_reloc(app, commands);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    for (const auto& c : commands)
      if (c.app->parsed()) return c.run();
  } catch (const CommandError& e) {
    std::fprintf(stderr, "jumpopt: %s\n", e.what());
    return e.code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "jumpopt: internal error: %s\n", e.what());
    return kExitSoftware;
  }
  return kExitUsage;
}
