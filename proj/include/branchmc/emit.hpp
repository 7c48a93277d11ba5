#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "branchmc/runner.hpp"

namespace branchmc {

enum class OutputFormat { Csv, Json };

OutputFormat parse_format(std::string_view name);

/// One output row; the CSV columns in order.
struct ResultRow {
  std::string scheme;
  std::string problem;
  int dim = 0;
  double maturity = 0.0;
  std::size_t n_particles = 0;
  double estimate = 0.0;
  double stderr_value = 0.0;  // column "stderr"
  double elapsed_s = 0.0;
  std::uint64_t seed = 0;
  int nested_order = 1;
  std::string quantity;

  bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kCsvHeader =
    "scheme,problem,dim,maturity,n_particles,estimate,stderr,elapsed_s,seed,nested_order,quantity";

ResultRow make_row(const RunConfig& config, const RunResult& result);

/// Reals are written with 17 significant digits.
void write_csv(const std::vector<ResultRow>& rows, std::ostream& out);
void write_json(const std::vector<ResultRow>& rows, std::ostream& out);
std::vector<ResultRow> read_csv(std::istream& in);
std::vector<ResultRow> read_json(std::istream& in);

/// Writes to `path`; throws std::runtime_error on I/O failure.
void emit(const std::vector<ResultRow>& rows, const std::string& path, OutputFormat format);

}  // namespace branchmc
