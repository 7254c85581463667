#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mftg/cli/config.hpp"
#include "mftg/cli/scenarios.hpp"
#include "mftg/cli/table.hpp"

namespace mftg::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3, kIoError = 4 };

struct RunOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
};

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Write-then-rename so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(Errc::IoError, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "cannot move " + tmp + " to " + path.string() + ": " + ec.message());
}

/// Table file names: the primary table is <scenario>.<ext>, others <scenario>_<table>.<ext>.
inline std::string table_file(const std::string& scenario, const Table& t, std::size_t i, const std::string& ext) {
  return (i == 0 ? scenario : scenario + "_" + t.name) + "." + ext;
}

struct RunResult {
  int code = kOk;
  std::vector<std::string> files;
  std::string message;
};

inline int exit_code_for(Errc c) {
  switch (c) {
    case Errc::ConfigInvalid: return kConfigError;
    case Errc::IoError: return kIoError;
    default: return kNumericalError;
  }
}

/// Load, validate, run and write. Never throws; errors map to exit codes.
inline RunResult run(const RunOptions& opt, std::ostream& err = std::cerr) {
  RunResult res;
  auto fail = [&](int code, const std::string& msg) {
    res.code = code;
    res.message = msg;
    err << "mftg: " << res.message << '\n';
    return res;
  };

  ScenarioConfig cfg;
  const Scenario* sc = nullptr;
  Job job;
  try {
    cfg = parse_config(read_file(opt.config_path));
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.out_dir) cfg.output = *opt.out_dir;
    if (opt.format) {
      if (*opt.format != "csv" && *opt.format != "json") throw Error(Errc::ConfigInvalid, "format: must be csv or json");
      cfg.format = *opt.format;
    }
    sc = find_scenario(cfg.scenario);
    if (!sc) throw Error(Errc::ConfigInvalid, "scenario: unknown scenario '" + cfg.scenario + "'");
    try {
      job = sc->prepare(Params(cfg.params));
    } catch (const Error& e) {
      // Module invariants are part of config validation.
      if (e.code() == Errc::ConfigInvalid) throw;
      throw Error(Errc::ConfigInvalid, e.what());
    }
  } catch (const Error& e) {
    return fail(exit_code_for(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(kConfigError, Error(Errc::ConfigInvalid, e.what()).what());
  }

  const auto start = std::chrono::steady_clock::now();
  std::vector<Table> tables;
  try {
    tables = job(cfg.seed);
  } catch (const Error& e) {
    return fail(kNumericalError, Error(Errc::ScenarioFailed, cfg.scenario + ": " + e.what()).what());
  } catch (const std::exception& e) {
    return fail(kNumericalError, Error(Errc::ScenarioFailed, cfg.scenario + ": " + e.what()).what());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  try {
    const std::filesystem::path dir(cfg.output);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
    for (std::size_t i = 0; i < tables.size(); ++i) {
      const auto name = table_file(cfg.scenario, tables[i], i, cfg.format);
      write_atomic(dir / name, cfg.format == "csv" ? to_csv(tables[i]) : to_json(tables[i]));
      res.files.push_back(name);
    }
    json manifest = {{"scenario", cfg.scenario},
                     {"config", opt.config_path},
                     {"config_hash", "fnv1a64:" + hex64(fnv1a(cfg.raw))},
                     {"seed", cfg.seed},
                     {"version", MFTG_VERSION},
                     {"format", cfg.format},
                     {"files", res.files},
                     {"wall_time_s", wall}};
    write_atomic(dir / (cfg.scenario + "_manifest.json"), manifest.dump(2) + "\n");
  } catch (const Error& e) {
    return fail(kIoError, e.what());
  } catch (const std::exception& e) {
    return fail(kIoError, Error(Errc::IoError, e.what()).what());
  }
  return res;
}

/// One line per scenario: name, default config path, description.
inline std::string list_scenarios() {
  std::string out;
  for (const auto& s : catalog()) out += s.name + "\t" + default_config_path(s.name) + "\t" + s.description + "\n";
  return out;
}

}  // namespace mftg::cli
