#pragma once

// CSV output with deterministic formatting: comma delimiter, '.' decimal
// point, header row, doubles printed with 17 significant digits so that
// identical runs produce identical bytes.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace opcwalk {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
        write_row_strings(header);
    }

    void write_row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    // Cells may mix integers, doubles and strings.
    template <typename... Ts>
    void write_row(const Ts&... cells) {
        std::vector<std::string> row;
        (row.push_back(cell_to_string(cells)), ...);
        write_row_strings(row);
    }

private:
    static std::string cell_to_string(double v) { return format_double(v); }
    static std::string cell_to_string(int v) { return std::to_string(v); }
    static std::string cell_to_string(long v) { return std::to_string(v); }
    static std::string cell_to_string(long long v) { return std::to_string(v); }
    static std::string cell_to_string(unsigned long long v) { return std::to_string(v); }
    static std::string cell_to_string(std::size_t v) { return std::to_string(v); }
    static std::string cell_to_string(const std::string& v) { return v; }
    static std::string cell_to_string(const char* v) { return v; }

    std::ofstream out_;
};

}  // namespace opcwalk
