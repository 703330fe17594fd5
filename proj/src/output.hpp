#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"
#include "rps_spde/config.hpp"

namespace rps::detail {

void ensure_dir(const std::string& dir);
std::string join_path(const std::string& dir, const std::string& name);

class CsvFile {
 public:
  CsvFile(const std::string& file, const char* header);
  ~CsvFile();
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;
  std::FILE* get() const { return f_; }
  void close();

 private:
  std::FILE* f_ = nullptr;
  std::string file_;
};

nlohmann::ordered_json config_json(const ExperimentConfig& cfg);

void write_manifest(const std::string& file, const ExperimentConfig& cfg, const nlohmann::ordered_json& results,
                    const std::vector<std::string>& files, double wall_time_s, int exit_code);

}  // namespace rps::detail
