#include <iostream>

#include "CLI11.hpp"

#include "nanorotor/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cavity cooling and spin-up of levitated nanorotors"};
  app.set_version_flag("--version", nanorotor::code_version());

  std::string command;
  std::string config;
  nanorotor::RunOptions opt;
  app.add_option("command", command, "analyze | scan | simulate | spinup")
      ->required()
      ->check(CLI::IsMember({"analyze", "scan", "simulate", "spinup"}));
  app.add_option("config", config, "scenario file")->required();
  app.add_option("--axis", opt.axis, "scan axis, a config key or alias such as psi");
  app.add_option("--from", opt.from, "first scan value (bare numbers are SI)");
  app.add_option("--to", opt.to, "last scan value");
  app.add_option("--points", opt.points, "number of scan points")->check(CLI::PositiveNumber);
  app.add_option("--pressure", opt.pressure, "gas pressure with unit, e.g. 5e-4mbar");
  app.add_option("--seed", opt.seed, "random seed");
  app.add_option("--out", opt.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return nanorotor::run_command(command, config, opt, std::cout, std::cerr);
}
