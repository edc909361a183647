#pragma once

#include "common.hpp"

#include <functional>
#include <vector>

namespace jumpopt {

struct Command {
  CLI::App* app = nullptr;
  std::function<int()> run;
};

void register_optimize(CLI::App& root, std::vector<Command>& out);
void register_simulate(CLI::App& root, std::vector<Command>& out);
void register_bench(CLI::App& root, std::vector<Command>& out);
void register_premotion(CLI::App& root, std::vector<Command>& out);
void register_reloc(CLI::App& root, std::vector<Command>& out);

}  // namespace jumpopt
