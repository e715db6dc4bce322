#include <string>

#include <CLI11.hpp>

#include "qgdirac/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nonlinear Dirac ground states on metric graphs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;

  const std::vector<std::string> names = {"spectrum", "validate", "ground",     "dcurve",
                                          "ceps",     "verify",   "concentrate"};
  std::map<std::string, CLI::App*> subs;
  for (const auto& n : names) {
    CLI::App* s = app.add_subcommand(n);
    s->add_option("-c,--config", config_path, "run configuration file")->required();
    s->add_option("-o,--out", out_dir, "output directory (overrides [run.out_dir])");
    subs[n] = s;
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) {
      qgdirac::ConfigFile file;
      try {
        file = qgdirac::ConfigFile::parse_file(config_path);
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
      }
      return qgdirac::run_subcommand_on(name, file, out_dir);
    }
  }
  return 1;
}
