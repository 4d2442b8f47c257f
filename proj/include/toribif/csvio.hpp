#ifndef TORIBIF_CSVIO_HPP
#define TORIBIF_CSVIO_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "toribif/errors.hpp"

namespace toribif {

// 17 significant digits, enough to round-trip a double
std::string fmt_g17(double v);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();

    void field(const std::string& s);
    void field(double v);
    void field(int v);
    void endrow();
    void close();
    const std::string& path() const { return path_; }

private:
    std::ofstream out_;
    std::string path_;
    size_t n_cols_ = 0;
    size_t col_ = 0;
};

uint64_t fnv1a64_file(const std::string& path);

struct OutputRecord {
    std::string file;
    uint64_t bytes = 0;
    std::string fnv1a64;
};

} // namespace toribif

#endif
