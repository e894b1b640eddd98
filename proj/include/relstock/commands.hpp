#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relstock/config.hpp"

namespace relstock::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitFileNotFound = 2;
inline constexpr int kExitUsage = 64;

/// Files produced by a command, written together. If any write fails the
/// files already written are removed again.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}
  void add(std::string name, std::string content);
  void commit() const;

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

void cmd_extract(const RunConfig& config, std::ostream& out);
void cmd_backtest(const RunConfig& config, std::ostream& out);
void cmd_synth(const RunConfig& config, std::ostream& out);

enum class ReportFormat { kCsv, kJson, kText };
ReportFormat parse_report_format(std::string_view s);

/// `path` is an output directory (report.csv + edges.csv), a report csv, or
/// a report json.
void cmd_report(const std::filesystem::path& path, ReportFormat format, std::ostream& out);

/// Parses argv, runs the command and maps failures to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relstock::cli
