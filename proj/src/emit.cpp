#include "branchmc/emit.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace branchmc {

namespace {

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T parse_field(const std::string& text) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw std::runtime_error("bad CSV field '" + text + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

OutputFormat parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw std::invalid_argument("unknown format '" + std::string(name) + "'");
}

ResultRow make_row(const RunConfig& c, const RunResult& r) {
  ResultRow row;
  row.scheme = scheme_name(c.scheme);
  row.problem = c.problem_file.empty() ? c.problem : c.problem_file;
  row.dim = c.dim;
  row.maturity = c.maturity;
  row.n_particles = r.n;
  row.estimate = r.estimate;
  row.stderr_value = r.std_error;
  row.elapsed_s = r.elapsed_s;
  row.seed = r.seed;
  row.nested_order = c.scheme == SchemeId::Original ? 1 : c.nested_order;
  row.quantity = quantity_name(c.quantity);
  return row;
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.scheme << ',' << r.problem << ',' << r.dim << ',' << real(r.maturity) << ',' << r.n_particles << ','
        << real(r.estimate) << ',' << real(r.stderr_value) << ',' << real(r.elapsed_s) << ',' << r.seed << ','
        << r.nested_order << ',' << r.quantity << '\n';
  }
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("unexpected CSV header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 11) throw std::runtime_error("CSV row has " + std::to_string(f.size()) + " fields");
    ResultRow r;
    r.scheme = f[0];
    r.problem = f[1];
    r.dim = parse_field<int>(f[2]);
    r.maturity = parse_field<double>(f[3]);
    r.n_particles = parse_field<std::size_t>(f[4]);
    r.estimate = parse_field<double>(f[5]);
    r.stderr_value = parse_field<double>(f[6]);
    r.elapsed_s = parse_field<double>(f[7]);
    r.seed = parse_field<std::uint64_t>(f[8]);
    r.nested_order = parse_field<int>(f[9]);
    r.quantity = f[10];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_json(const std::vector<ResultRow>& rows, std::ostream& out) {
  // Reals go through %.17g so the JSON and CSV outputs carry the same digits.
  out << "[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << (i ? ",\n " : "\n ") << "{\"scheme\": " << nlohmann::json(r.scheme).dump()
        << ", \"problem\": " << nlohmann::json(r.problem).dump() << ", \"dim\": " << r.dim
        << ", \"maturity\": " << real(r.maturity) << ", \"n_particles\": " << r.n_particles
        << ", \"estimate\": " << real(r.estimate) << ", \"stderr\": " << real(r.stderr_value)
        << ", \"elapsed_s\": " << real(r.elapsed_s) << ", \"seed\": " << r.seed
        << ", \"nested_order\": " << r.nested_order << ", \"quantity\": " << nlohmann::json(r.quantity).dump()
        << "}";
  }
  out << (rows.empty() ? "]\n" : "\n]\n");
}

std::vector<ResultRow> read_json(std::istream& in) {
  const auto j = nlohmann::json::parse(in);
  std::vector<ResultRow> rows;
  for (const auto& e : j) {
    ResultRow r;
    r.scheme = e.at("scheme").get<std::string>();
    r.problem = e.at("problem").get<std::string>();
    r.dim = e.at("dim").get<int>();
    r.maturity = e.at("maturity").get<double>();
    r.n_particles = e.at("n_particles").get<std::size_t>();
    r.estimate = e.at("estimate").get<double>();
    r.stderr_value = e.at("stderr").get<double>();
    r.elapsed_s = e.at("elapsed_s").get<double>();
    r.seed = e.at("seed").get<std::uint64_t>();
    r.nested_order = e.at("nested_order").get<int>();
    r.quantity = e.at("quantity").get<std::string>();
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit(const std::vector<ResultRow>& rows, const std::string& path, OutputFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  if (format == OutputFormat::Csv) {
    write_csv(rows, out);
  } else {
    write_json(rows, out);
  }
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace branchmc
