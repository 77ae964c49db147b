#pragma once

#include <string>
#include <vector>

namespace plankton::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 if absent
};

Table read_file(const std::string& path);
void write_file(const std::string& path, const Table& table);

// Canonical float formatting for CSV artifacts: 9 significant digits.
std::string format_value(double value);

std::string escape_field(const std::string& field);

}  // namespace plankton::csv
