#pragma once

#include <string>
#include <vector>

namespace corrx {

/// Raw CSV contents: header plus string cells. Empty string = empty cell.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Reads a comma-delimited UTF-8 file. Throws FileError if unreadable and
/// RaggedRowError (with the 1-based line number) on inconsistent row width.
CsvTable read_csv(const std::string& path);

/// Writes rows verbatim. Throws FileError if the file cannot be created.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Shortest decimal form with `sig` significant digits ("%.{sig}g").
std::string format_sig(double v, int sig);

}  // namespace corrx
