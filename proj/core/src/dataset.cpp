#include "fatigue/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fatigue/errors.hpp"

namespace fatigue {

namespace {

double parse_double(const std::string& token, int line, const char* column) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw ValidationError("dataset line " + std::to_string(line) + ": cannot parse " +
                          column + " value '" + token + "'");
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream stream(line);
  while (std::getline(stream, token, ',')) out.push_back(token);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<Experiment> read_dataset_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f.good()) throw ValidationError("cannot open dataset file " + path);

  std::string line;
  if (!std::getline(f, line)) throw ValidationError("dataset file " + path + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "specimen_id,s_max_ksi,ratio_r,cycles,failed")
    throw ValidationError("dataset header must be "
                          "'specimen_id,s_max_ksi,ratio_r,cycles,failed', got '" +
                          line + "'");

  std::vector<Experiment> data;
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 5)
      throw ValidationError("dataset line " + std::to_string(line_no) +
                            ": expected 5 fields, got " + std::to_string(fields.size()));
    Experiment exp;
    exp.specimen_id = fields[0];
    exp.s_max_ksi = parse_double(fields[1], line_no, "s_max_ksi");
    exp.ratio_r = parse_double(fields[2], line_no, "ratio_r");
    exp.cycles = parse_double(fields[3], line_no, "cycles");
    if (fields[4] == "0") {
      exp.failed = false;
    } else if (fields[4] == "1") {
      exp.failed = true;
    } else {
      throw ValidationError("dataset line " + std::to_string(line_no) +
                            ": failed must be 0 or 1, got '" + fields[4] + "'");
    }
    if (!(exp.cycles > 0.0))
      throw ValidationError("dataset line " + std::to_string(line_no) +
                            ": cycles must be positive");
    if (!(exp.ratio_r < 1.0))
      throw ValidationError("dataset line " + std::to_string(line_no) +
                            ": cycle ratio R must be < 1");
    if (!(exp.s_max_ksi > 0.0))
      throw ValidationError("dataset line " + std::to_string(line_no) +
                            ": s_max_ksi must be positive");
    data.push_back(std::move(exp));
  }
  return data;
}

namespace {

// Shortest decimal form that parses back to the same double.
std::string shortest(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

void write_dataset_csv(const std::vector<Experiment>& data, const std::string& path) {
  std::ofstream f(path);
  if (!f.good()) throw ValidationError("cannot open " + path);
  f << "specimen_id,s_max_ksi,ratio_r,cycles,failed\n";
  for (const auto& exp : data) {
    f << exp.specimen_id << ',' << shortest(exp.s_max_ksi) << ','
      << shortest(exp.ratio_r) << ',' << shortest(exp.cycles) << ','
      << (exp.failed ? 1 : 0) << '\n';
  }
}

}  // namespace fatigue
