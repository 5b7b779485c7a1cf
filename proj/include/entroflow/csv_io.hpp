#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace entroflow {

/// Fixed-header CSV writer; every number is printed with "%.12e".
class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header);
    void row(const std::vector<double>& values);

private:
    std::ostream& out_;
    std::size_t columns_;
};

std::string format_number(double v);

}  // namespace entroflow
