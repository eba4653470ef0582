#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rankq {

// Q as a percentage with one decimal ("93.8"). Only q = 1 prints as "100";
// values that merely round up print "100.0".
std::string format_percent(double q);

// True when the cell is distinguishable at this epsilon, i.e. Q > 1 - epsilon.
bool flag_cell(double q, double epsilon);

// Attributes as rows, methods as columns. Missing cells hold no value.
struct ReportTable {
    std::vector<std::string> methods;
    std::vector<std::string> attributes;
    std::vector<std::vector<std::optional<double>>> q;  // [attribute][method]
    double epsilon = 0.1;
};

// Flagged cells carry a trailing '*'; missing cells print '-'.
std::string render_text(const ReportTable& table);
// Flagged cells are bold.
std::string render_html(const ReportTable& table);

}  // namespace rankq
