#include "toribif/csvio.hpp"

#include <cstdio>

namespace toribif {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), path_(path), n_cols_(header.size()) {
    if (!out_) throw Error("cannot open " + path + " for writing");
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

CsvWriter::~CsvWriter() { close(); }

void CsvWriter::field(const std::string& s) {
    if (col_) out_ << ',';
    out_ << s;
    ++col_;
}

void CsvWriter::field(double v) { field(fmt_g17(v)); }
void CsvWriter::field(int v) { field(std::to_string(v)); }

void CsvWriter::endrow() {
    if (col_ != n_cols_) throw Error("csv row width mismatch in " + path_);
    out_ << '\n';
    col_ = 0;
}

void CsvWriter::close() {
    if (out_.is_open()) out_.close();
}

uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path + " for checksum");
    uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    return h;
}

} // namespace toribif
