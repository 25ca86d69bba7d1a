#pragma once

// Minimal reader for the unquoted comma-separated files this project writes.

#include "cspsel/common.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace cspsel::csv {

struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Splits into rows of fields. Blank lines are skipped; CR before LF is dropped.
std::vector<Row> read(std::string_view text);

/// Throws ParseError unless `row` equals `expected` field for field.
void expect_header(const Row& row, const std::vector<std::string>& expected);

} // namespace cspsel::csv
