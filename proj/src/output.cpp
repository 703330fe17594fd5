#include "output.hpp"

#include <filesystem>
#include <fstream>

#include "rps_spde/error.hpp"

#ifndef RPS_SPDE_VERSION
#define RPS_SPDE_VERSION "0.0.0"
#endif

namespace rps::detail {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::io_error, "cannot create " + dir + ": " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

CsvFile::CsvFile(const std::string& file, const char* header) : file_(file) {
  f_ = std::fopen(file.c_str(), "w");
  if (!f_) fail(Errc::io_error, "cannot open " + file);
  std::fprintf(f_, "%s\n", header);
}

CsvFile::~CsvFile() {
  if (f_) std::fclose(f_);
}

void CsvFile::close() {
  if (!f_) return;
  const int rc = std::fclose(f_);
  f_ = nullptr;
  if (rc != 0) fail(Errc::io_error, "write failed for " + file_);
}

nlohmann::ordered_json config_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& key : config_keys()) {
    const std::string v = get_config_value(cfg, key);
    auto parsed = nlohmann::ordered_json::parse(v, nullptr, false);
    if (parsed.is_discarded())
      j[key] = v;  // inf
    else
      j[key] = std::move(parsed);
  }
  return j;
}

void write_manifest(const std::string& file, const ExperimentConfig& cfg, const nlohmann::ordered_json& results,
                    const std::vector<std::string>& files, double wall_time_s, int exit_code) {
  nlohmann::ordered_json m;
  m["experiment"] = cfg.experiment;
  m["library_version"] = RPS_SPDE_VERSION;
  m["seed"] = cfg.seed;
  m["exit_code"] = exit_code;
  m["config"] = config_json(cfg);
  m["results"] = results;
  m["files"] = files;
  m["wall_time_s"] = wall_time_s;
  std::ofstream os(file);
  if (!os) fail(Errc::io_error, "cannot open " + file);
  os << m.dump(2) << "\n";
  if (!os) fail(Errc::io_error, "write failed for " + file);
}

}  // namespace rps::detail
