#pragma once

#include <string>
#include <vector>

namespace ethsim::cli {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

// Plain line chart; enough to eyeball a curve without a plotting stack.
void write_line_chart(const std::string& path, const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series);

}  // namespace ethsim::cli
