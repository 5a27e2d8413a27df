#include "hetseg/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace hetseg {

namespace {

std::string strip(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  return s.substr(a, b - a);
}

double parse_number(const std::string& field, int line, const char* name) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw CsvError(line, std::string("cannot parse ") + name + " value '" + field + "'");
  }
  if (pos != field.size())
    throw CsvError(line, std::string("trailing characters in ") + name + " value '" + field + "'");
  return v;
}

}  // namespace

Sample load_sample(std::istream& in) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw CsvError(1, "empty input, expected header 't,y'");
  ++line_no;
  if (strip(line) != "t,y") throw CsvError(line_no, "expected header 't,y'");

  std::vector<double> t, y;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = strip(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string::npos) throw CsvError(line_no, "expected two comma-separated fields");
    const std::string tf = strip(row.substr(0, comma));
    const std::string yf = strip(row.substr(comma + 1));
    if (yf.find(',') != std::string::npos)
      throw CsvError(line_no, "expected exactly two fields");
    const double tv = parse_number(tf, line_no, "t");
    const double yv = parse_number(yf, line_no, "y");
    if (tv < 0.0 || tv > 1.0) throw CsvError(line_no, "t outside [0,1]");
    if (!t.empty() && tv <= t.back()) throw CsvError(line_no, "t not strictly increasing");
    t.push_back(tv);
    y.push_back(yv);
  }
  if (t.size() < 2) throw CsvError(line_no + 1, "need at least 2 observations");
  return Sample::make(std::move(t), std::move(y));
}

Sample load_sample_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(0, "cannot open '" + path + "'");
  return load_sample(in);
}

void save_sample(std::ostream& out, const Sample& sample) {
  out << "t,y\n";
  for (int i = 0; i < sample.n(); ++i) {
    out << format_double(sample.t[static_cast<std::size_t>(i)]) << ','
        << format_double(sample.y[static_cast<std::size_t>(i)]) << '\n';
  }
}

void save_sample_file(const std::string& path, const Sample& sample) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  save_sample(out, sample);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace hetseg
