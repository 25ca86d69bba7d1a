#include "csv.hpp"

namespace cspsel::csv {

std::vector<Row> read(std::string_view text) {
    std::vector<Row> rows;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(start, nl - start);
        start = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        Row row;
        row.line = line_no;
        std::size_t f = 0;
        for (;;) {
            const std::size_t comma = line.find(',', f);
            row.fields.emplace_back(line.substr(f, comma == std::string_view::npos ? std::string_view::npos : comma - f));
            if (comma == std::string_view::npos) break;
            f = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void expect_header(const Row& row, const std::vector<std::string>& expected) {
    if (row.fields != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw ParseError("unexpected header, want '" + want + "'", row.line, 1);
    }
}

} // namespace cspsel::csv
