#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nvzeno/cli.hpp"
#include "nvzeno/error.hpp"

using nlohmann::json;

namespace {

int fail(const std::exception& e, const std::string& experiment) {
  std::cerr << nvzeno::error_line(e, experiment) << '\n';
  return nvzeno::exit_code_for(e);
}

// Command-line strings become JSON scalars: numbers stay numbers, "a,b" lists
// become arrays, anything else a string.
json flag_value(const std::string& s) {
  if (s.find(',') != std::string::npos) {
    json arr = json::array();
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) arr.push_back(flag_value(item));
    return arr;
  }
  try {
    return json::parse(s);
  } catch (const json::exception&) {
    return s;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeno-subspace NV/nuclear spin simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path = "-", format;
  int threads = -1;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config file");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_path, "output path ('-' for stdout)");
  run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--threads", threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  std::string experiment, param;
  double from = 0.0, to = 0.0;
  int points = 0;
  auto* sweep = app.add_subcommand("sweep", "single-axis sweep of a named experiment");
  sweep->add_option("--experiment", experiment, "experiment name")->required();
  sweep->add_option("--param", param, "axis to sweep")->required();
  sweep->add_option("--from", from, "first grid value")->required();
  sweep->add_option("--to", to, "last grid value")->required();
  sweep->add_option("--points", points, "grid points")->required();
  sweep->add_option("--out", out_path, "output path ('-' for stdout)");
  sweep->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sweep->add_option("--threads", threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  std::vector<std::string> fixed_values(nvzeno::scalar_config_keys().size());
  {
    std::size_t i = 0;
    for (const auto& key : nvzeno::scalar_config_keys()) {
      if (key == "experiment" || key == "output" || key == "format" || key == "threads") {
        ++i;
        continue;
      }
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      sweep->add_option(flag, fixed_values[i], "fixed " + key);
      ++i;
    }
  }

  auto* list = app.add_subcommand("list-experiments", "list named experiments");
  auto* self = app.add_subcommand("selftest", "run the invariant checks on small grids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    for (const auto& e : nvzeno::list_experiments())
      std::cout << e.name << "\t" << e.figure << "\t" << e.description << '\n';
    return 0;
  }
  if (self->parsed()) return nvzeno::selftest(std::cout);

  json doc = json::object();
  if (run->parsed()) {
    std::ifstream f(config_path, std::ios::binary);
    if (!f) {
      return fail(nvzeno::Error(nvzeno::ErrorCode::Io, "cannot read " + config_path), "");
    }
    std::stringstream ss;
    ss << f.rdbuf();
    try {
      (void)nvzeno::parse_config(ss.str());
    } catch (const std::exception& e) {
      return fail(e, "");
    }
    doc = json::parse(ss.str());
  } else {
    doc["experiment"] = experiment;
    if (points < 1) {
      return fail(nvzeno::Error(nvzeno::ErrorCode::OutOfRange, "--points must be >= 1"), experiment);
    }
    doc[nvzeno::kebab_to_key(param)] = {{"from", from}, {"to", to}, {"points", points}};
    const auto& keys = nvzeno::scalar_config_keys();
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (!fixed_values[i].empty()) doc[keys[i]] = flag_value(fixed_values[i]);
  }
  if (out_path != "-" || !doc.contains("output")) doc["output"] = out_path;
  if (!format.empty()) doc["format"] = format;
  if (threads >= 0) doc["threads"] = threads;

  nvzeno::RunConfig cfg;
  try {
    cfg = nvzeno::parse_config(doc.dump());
  } catch (const std::exception& e) {
    return fail(e, doc.value("experiment", std::string()));
  }
  return nvzeno::run_command(cfg, std::cout, std::cerr);
}
