#pragma once

#include <string>
#include <vector>

namespace simfsvgd {

// Round-trip-exact formatting so repeated runs produce byte-identical files.
std::string format_double(double v);

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows);

// Returns data rows; the header goes to *header when non-null.
std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               std::string* header = nullptr);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace simfsvgd
