#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tv/app.hpp"

namespace {

std::string dashed(std::string s) {
  for (auto& c : s)
    if (c == '_') c = '-';
  return s;
}

std::string help_footer() {
  std::string s = "\nScenarios (keys with defaults in brackets):\n";
  for (const auto& sc : tv::app::scenarios()) {
    s += "  " + sc.name + ": " + sc.summary + "\n    keys:";
    for (const auto& [k, d] : sc.keys) s += " " + k + (d.empty() ? "" : "[" + d + "]");
    s += "\n    required:";
    for (const auto& r : sc.required) s += " " + r;
    s += "\n    example: " + sc.example + "\n";
  }
  s += "\nConfig files hold 'key = value' lines; flags override them. An output CSV can be\n"
       "passed back as --config to reproduce it. TV_THREADS sets the worker count.\n"
       "Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.\n";
  return s;
}

struct Command {
  CLI::App* app = nullptr;
  std::string config_path;
  std::string output_path;
  std::map<std::string, std::string> values;
  std::vector<std::string> log1, lin1, log2, lin2;
  bool optimize = false;
};

void add_keys(Command& c) {
  for (const auto* list : {&tv::app::model_keys(), &tv::app::control_keys()}) {
    for (const auto& k : *list) {
      if (k.kind == tv::app::KeyKind::Flag) {
        c.app->add_flag("--" + dashed(k.name), c.optimize, k.help);
        continue;
      }
      std::string desc = k.help;
      if (!k.choices.empty()) {
        desc += " {";
        for (std::size_t i = 0; i < k.choices.size(); ++i) desc += (i ? "|" : "") + k.choices[i];
        desc += "}";
      }
      c.app->add_option("--" + dashed(k.name), c.values[k.name], desc);
    }
  }
  c.app->add_option("-c,--config", c.config_path, "configuration file");
  c.app->add_option("-o,--output", c.output_path, "output path (default: stdout)");
  c.app->add_option("--log", c.log1, "log grid: LO HI")->expected(2);
  c.app->add_option("--linear", c.lin1, "linear grid: LO HI")->expected(2);
  c.app->add_option("--log2", c.log2, "log grid of param2: LO HI")->expected(2);
  c.app->add_option("--linear2", c.lin2, "linear grid of param2: LO HI")->expected(2);
  c.app->footer(help_footer());
}

tv::app::Config merged_config(const Command& c) {
  tv::app::Config cfg;
  if (!c.config_path.empty()) cfg = tv::app::load_config(c.config_path);
  for (const auto& [k, v] : c.values) {
    auto* opt = c.app->get_option("--" + dashed(k));
    if (opt->count() > 0) cfg[k] = v;
  }
  if (c.app->get_option("--optimize-frequency")->count() > 0) cfg["optimize_frequency"] = c.optimize ? "true" : "false";
  auto grid = [&](const std::vector<std::string>& v, const char* kind, const std::string& sfx) {
    if (v.empty()) return;
    cfg["grid" + sfx] = kind;
    cfg["lo" + sfx] = v[0];
    cfg["hi" + sfx] = v[1];
  };
  if (!c.log1.empty() && !c.lin1.empty()) throw tv::app::ConfigError("--log and --linear are exclusive");
  if (!c.log2.empty() && !c.lin2.empty()) throw tv::app::ConfigError("--log2 and --linear2 are exclusive");
  grid(c.log1, "log", "");
  grid(c.lin1, "linear", "");
  grid(c.log2, "log", "2");
  grid(c.lin2, "linear", "2");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tv: linear quantum measurement characterization (conditional variance and transfer coefficients)"};
  app.set_version_flag("--version", TV_VERSION);
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> names = {
      {"sweep", "tabulate figures over one or two swept parameters"},
      {"sql", "minimize V_c over cooperativity (generalized SQL), optionally per sweep point"},
      {"threshold", "bisect a parameter for a V_c or T_s+T_m crossing"},
      {"optimize-frequency", "minimize V_c over detection frequency, optionally per sweep point"},
      {"pulsed", "pulsed readout over pulse duration"}};
  std::vector<Command> cmds(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    cmds[i].app = app.add_subcommand(names[i].first, names[i].second);
    add_keys(cmds[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return tv::app::kExitConfig;
  }

  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!cmds[i].app->parsed()) continue;
    try {
      const std::string out = tv::app::run(names[i].first, merged_config(cmds[i]), tv::app::thread_count());
      if (cmds[i].output_path.empty()) {
        std::fwrite(out.data(), 1, out.size(), stdout);
      } else {
        std::ofstream f(cmds[i].output_path, std::ios::binary);
        if (!(f << out)) {
          std::cerr << "error: cannot write '" << cmds[i].output_path << "'\n";
          return tv::app::kExitConfig;
        }
      }
      return tv::app::kExitOk;
    } catch (const tv::app::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return tv::app::kExitConfig;
    } catch (const tv::Error& e) {
      const bool config = e.kind() == tv::ErrorKind::InvalidArgument;
      std::cerr << (config ? "config error: " : "numerical failure: ") << e.what() << "\n";
      return config ? tv::app::kExitConfig : tv::app::kExitNumeric;
    }
  }
  return tv::app::kExitConfig;
}
