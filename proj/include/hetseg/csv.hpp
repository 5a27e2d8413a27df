#pragma once
// CSV ingestion and emission for samples ("t,y" with a header row).

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "hetseg/core.hpp"

namespace hetseg {

/// Parse failure with the 1-based line number where it occurred.
struct CsvError : std::runtime_error {
  CsvError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
  int line = 0;
};

Sample load_sample(std::istream& in);
Sample load_sample_file(const std::string& path);

void save_sample(std::ostream& out, const Sample& sample);
void save_sample_file(const std::string& path, const Sample& sample);

/// Full-precision decimal formatting (round-trips through strtod).
std::string format_double(double v);

}  // namespace hetseg
