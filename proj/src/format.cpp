#include "rankq/format.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "rankq/qcompute.hpp"

namespace rankq {

std::string format_percent(double q) {
    if (q == 1.0) return "100";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * q);
    return buf;
}

bool flag_cell(double q, double epsilon) {
    return decide(q, epsilon) == Decision::Distinguishable;
}

namespace {

std::string cell_text(const std::optional<double>& q, double epsilon) {
    if (!q) return "-";
    return format_percent(*q) + (flag_cell(*q, epsilon) ? "*" : "");
}

std::string html_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_text(const ReportTable& t) {
    std::size_t first_width = std::string("attribute").size();
    for (const auto& a : t.attributes) first_width = std::max(first_width, a.size());
    std::vector<std::size_t> widths;
    for (const auto& m : t.methods) widths.push_back(std::max<std::size_t>(m.size(), 6));

    std::ostringstream out;
    auto pad = [&](const std::string& s, std::size_t w) {
        out << s << std::string(w > s.size() ? w - s.size() : 0, ' ');
    };
    pad("attribute", first_width);
    for (std::size_t j = 0; j < t.methods.size(); ++j) {
        out << "  ";
        pad(t.methods[j], widths[j]);
    }
    out << '\n';
    for (std::size_t i = 0; i < t.attributes.size(); ++i) {
        pad(t.attributes[i], first_width);
        for (std::size_t j = 0; j < t.methods.size(); ++j) {
            out << "  ";
            pad(cell_text(t.q[i][j], t.epsilon), widths[j]);
        }
        out << '\n';
    }
    out << "* Q > " << format_percent(1.0 - t.epsilon)
        << "%: distinguishable from human ranking\n";
    return out.str();
}

std::string render_html(const ReportTable& t) {
    std::ostringstream out;
    out << "<table>\n<thead><tr><th></th>";
    for (const auto& m : t.methods) out << "<th>" << html_escape(m) << "</th>";
    out << "</tr></thead>\n<tbody>\n";
    for (std::size_t i = 0; i < t.attributes.size(); ++i) {
        out << "<tr><th>" << html_escape(t.attributes[i]) << "</th>";
        for (std::size_t j = 0; j < t.methods.size(); ++j) {
            const auto& q = t.q[i][j];
            out << "<td>";
            if (!q) {
                out << "-";
            } else if (flag_cell(*q, t.epsilon)) {
                out << "<b>" << format_percent(*q) << "</b>";
            } else {
                out << format_percent(*q);
            }
            out << "</td>";
        }
        out << "</tr>\n";
    }
    out << "</tbody>\n</table>\n";
    return out.str();
}

}  // namespace rankq
