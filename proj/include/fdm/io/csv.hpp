#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdm::io {

// Minimal CSV support: comma-separated, no quoting (none of our fields need it).
// Lines starting with '#' are header comments carrying run metadata.

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

struct CsvFile {
    std::vector<std::string> comments;  // '#'-prefixed lines, verbatim without '#'
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvFile read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    CsvFile f;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            f.comments.push_back(line.substr(1));
            continue;
        }
        if (!have_header) {
            f.header = split_csv_line(line);
            have_header = true;
        } else {
            f.rows.push_back(split_csv_line(line));
        }
    }
    return f;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    }

    void comment(const std::string& text) { out_ << '#' << text << '\n'; }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

}  // namespace fdm::io
