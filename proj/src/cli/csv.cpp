#include <charconv>
#include <string>

#include "dyann/cli.hpp"
#include "dyann/error.hpp"

namespace dyann::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<Sample> parse_csv(std::string_view text, std::size_t inputs, std::size_t outputs,
                              bool has_header) {
  std::vector<Sample> samples;
  bool header_pending = has_header;
  std::size_t line_number = 0;

  while (!text.empty()) {
    const auto newline = text.find('\n');
    const std::string_view line = trim(text.substr(0, newline));
    text = newline == std::string_view::npos ? std::string_view{} : text.substr(newline + 1);
    ++line_number;
    if (line.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }

    std::vector<double> row;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view cell = trim(rest.substr(0, comma));
      double value = 0.0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc{} || end != cell.data() + cell.size()) {
        throw InvalidArgument("csv line " + std::to_string(line_number) + ", column " +
                              std::to_string(row.size() + 1) + ": '" + std::string(cell) +
                              "' is not a number");
      }
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }

    if (row.size() != inputs + outputs) {
      throw DimensionMismatch("csv line " + std::to_string(line_number) + " has " +
                              std::to_string(row.size()) + " columns, network needs " +
                              std::to_string(inputs) + " inputs + " + std::to_string(outputs) +
                              " targets");
    }
    Sample s;
    s.input.assign(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(inputs));
    s.target.assign(row.begin() + static_cast<std::ptrdiff_t>(inputs), row.end());
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace dyann::cli
