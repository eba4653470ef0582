#include "rankq/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "rankq/error.hpp"

namespace rankq {

const char* to_string(Choice c) noexcept {
    switch (c) {
        case Choice::First: return "first";
        case Choice::Second: return "second";
        case Choice::Undecided: return "undecided";
    }
    return "?";
}

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

// Line-oriented CSV reader: no quoting, blank lines skipped, CRLF and a
// leading UTF-8 byte-order mark tolerated.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Returns false at end of input. Fields are trimmed.
    bool next(std::vector<std::string>& fields) {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++line_;
            std::string_view view = raw;
            if (line_ == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
            if (trim(view).empty()) continue;
            fields.clear();
            std::size_t start = 0;
            while (true) {
                const auto comma = view.find(',', start);
                const auto field = trim(view.substr(start, comma - start));
                if (field.find('"') != std::string_view::npos) {
                    throw ParseError(line_, "quoted fields are not supported");
                }
                fields.emplace_back(field);
                if (comma == std::string_view::npos) break;
                start = comma + 1;
            }
            return true;
        }
        return false;
    }

    std::size_t line() const noexcept { return line_; }

    // Reads the header row. Returns false for an input with no lines.
    bool expect_header(const char* header) {
        std::vector<std::string> fields;
        if (!next(fields)) return false;
        std::string joined;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) joined += ',';
            joined += fields[i];
        }
        if (joined != header) {
            throw ParseError(line_, "expected header '" + std::string(header) + "', got '" +
                                        joined + "'");
        }
        return true;
    }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

void check_field_count(const std::vector<std::string>& fields, std::size_t expected,
                       std::size_t line) {
    if (fields.size() != expected) {
        throw ParseError(line, "expected " + std::to_string(expected) + " fields, got " +
                                   std::to_string(fields.size()));
    }
}

void check_id(const std::string& id, const char* what, std::size_t line) {
    if (id.empty()) throw ParseError(line, std::string("empty ") + what);
}

void check_writable_id(const std::string& id) {
    if (id.empty() || id.find_first_of(",\"\r\n") != std::string::npos) {
        throw Error("identifier '" + id + "' cannot be written to CSV");
    }
}

Choice parse_choice(const std::string& field, bool allow_undecided, std::size_t line) {
    if (field == "first") return Choice::First;
    if (field == "second") return Choice::Second;
    if (field == "undecided") {
        if (allow_undecided) return Choice::Undecided;
        throw RangeError(line, "choice 'undecided' is not allowed here");
    }
    throw ParseError(line, "unknown choice '" + field + "'");
}

void check_sink(const std::ostream& sink) {
    if (!sink) throw Error("write to output failed");
}

}  // namespace

std::vector<AnnotationRecord> parse_annotations(std::istream& source) {
    CsvReader reader(source);
    std::vector<AnnotationRecord> records;
    if (!reader.expect_header(kAnnotationsHeader)) return records;

    std::vector<std::string> fields;
    while (reader.next(fields)) {
        const auto line = reader.line();
        check_field_count(fields, 4, line);
        AnnotationRecord rec;
        rec.pair_id = fields[0];
        rec.annotator_id = fields[1];
        check_id(rec.pair_id, "pair_id", line);
        check_id(rec.annotator_id, "annotator_id", line);
        rec.choice = parse_choice(fields[2], true, line);

        const std::string& conf = fields[3];
        if (!conf.empty()) {
            int value = 0;
            const auto [ptr, ec] = std::from_chars(conf.data(), conf.data() + conf.size(), value);
            if (ec == std::errc::result_out_of_range) {
                throw RangeError(line, "confidence '" + conf + "' out of range {0,1,2}");
            }
            if (ec != std::errc() || ptr != conf.data() + conf.size()) {
                throw ParseError(line, "confidence '" + conf + "' is not an integer");
            }
            if (value < 0 || value > 2) {
                throw RangeError(line, "confidence '" + conf + "' out of range {0,1,2}");
            }
            if (rec.choice == Choice::Undecided) {
                throw ParseError(line, "undecided vote cannot carry a confidence score");
            }
            rec.confidence = value;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void write_annotations(std::span<const AnnotationRecord> records, std::ostream& sink) {
    sink << kAnnotationsHeader << '\n';
    for (const auto& r : records) {
        check_writable_id(r.pair_id);
        check_writable_id(r.annotator_id);
        sink << r.pair_id << ',' << r.annotator_id << ',' << to_string(r.choice) << ',';
        if (r.confidence) sink << *r.confidence;
        sink << '\n';
    }
    check_sink(sink);
}

FilterResult filter_pairs(std::span<const AnnotationRecord> records, const FilterPolicy& policy) {
    struct Tally {
        PairCounts counts;
        int undecided = 0;
    };
    std::vector<Tally> tallies;
    std::unordered_map<std::string, std::size_t> index;

    for (const auto& r : records) {
        auto [it, inserted] = index.try_emplace(r.pair_id, tallies.size());
        if (inserted) {
            tallies.emplace_back();
            tallies.back().counts.pair_id = r.pair_id;
        }
        Tally& t = tallies[it->second];
        if (r.choice == Choice::Undecided) {
            ++t.undecided;
            continue;
        }
        ++t.counts.n;
        if (r.choice == Choice::First) ++t.counts.n_first;
        if (r.confidence) {
            if (!t.counts.scores) t.counts.scores.emplace();
            auto& s = *t.counts.scores;
            switch (*r.confidence) {
                case 0: ++s.n0; break;
                case 1: ++s.n1; break;
                case 2: ++s.n2; break;
                default: throw Error("pair '" + r.pair_id + "': confidence outside {0,1,2}");
            }
        }
    }

    FilterResult result;
    for (auto& t : tallies) {
        if (t.undecided >= policy.discard_at || t.counts.n == 0) {
            result.dropped.push_back(t.counts.pair_id);
        } else {
            result.kept.push_back(std::move(t.counts));
        }
    }
    return result;
}

bool detect_unanimous(const PairCounts& counts) {
    return counts.n >= 1 && (counts.n_first == counts.n || counts.n_first == 0);
}

std::size_t export_targets(std::span<const PairModel> models, std::ostream& sink) {
    if (models.empty()) throw Error("no models to export");
    sink << kTargetsHeader << '\n';
    char buf[32];
    for (const auto& m : models) {
        check_writable_id(m.pair_id);
        std::snprintf(buf, sizeof buf, "%.6f", m.theta);
        sink << m.pair_id << ',' << buf << ',' << (m.flipped ? 1 : 0) << '\n';
    }
    check_sink(sink);
    return models.size();
}

std::vector<PairModel> parse_targets(std::istream& source) {
    CsvReader reader(source);
    std::vector<PairModel> models;
    if (!reader.expect_header(kTargetsHeader)) return models;

    std::unordered_set<std::string> seen;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        const auto line = reader.line();
        check_field_count(fields, 3, line);
        PairModel m;
        m.pair_id = fields[0];
        check_id(m.pair_id, "pair_id", line);
        if (!seen.insert(m.pair_id).second) {
            throw ParseError(line, "duplicate pair id '" + m.pair_id + "'");
        }

        const std::string& t = fields[1];
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), m.theta);
        if (ec != std::errc() || ptr != t.data() + t.size()) {
            throw ParseError(line, "theta '" + t + "' is not a number");
        }
        if (!(m.theta >= 0.5 && m.theta <= 1.0)) {
            throw RangeError(line, "theta '" + t + "' outside [0.5, 1]");
        }

        const std::string& f = fields[2];
        if (f == "1" || f == "true") {
            m.flipped = true;
        } else if (f == "0" || f == "false") {
            m.flipped = false;
        } else {
            throw ParseError(line, "flipped '" + f + "' is not 0/1");
        }
        m.provenance = Provenance::Imported;
        models.push_back(std::move(m));
    }
    return models;
}

RankingSequence parse_predictions(std::istream& source, std::span<const PairModel> models) {
    std::unordered_map<std::string, bool> flipped;
    for (const auto& m : models) flipped.emplace(m.pair_id, m.flipped);

    CsvReader reader(source);
    RankingSequence seq;
    reader.expect_header(kPredictionsHeader);

    std::vector<std::string> fields;
    while (reader.next(fields)) {
        const auto line = reader.line();
        check_field_count(fields, 2, line);
        const std::string& id = fields[0];
        check_id(id, "pair_id", line);
        const Choice choice = parse_choice(fields[1], false, line);
        const auto it = flipped.find(id);
        if (it == flipped.end()) {
            throw CoverageError("line " + std::to_string(line) + ": pair '" + id +
                                "' is not in the model");
        }
        const bool first = choice == Choice::First;
        if (!seq.choices.emplace(id, first != it->second).second) {
            throw ParseError(line, "duplicate prediction for pair '" + id + "'");
        }
    }

    if (seq.size() != flipped.size()) {
        std::string missing;
        std::size_t shown = 0;
        for (const auto& m : models) {
            if (seq.choices.count(m.pair_id)) continue;
            if (shown++ < 5) missing += (missing.empty() ? "" : ", ") + m.pair_id;
        }
        throw CoverageError("predictions missing " + std::to_string(flipped.size() - seq.size()) +
                            " pair(s): " + missing + (shown > 5 ? ", ..." : ""));
    }
    return seq;
}

void write_predictions(const RankingSequence& sequence, std::span<const PairModel> models,
                       std::ostream& sink) {
    sink << kPredictionsHeader << '\n';
    for (const auto& m : models) {
        const auto it = sequence.choices.find(m.pair_id);
        if (it == sequence.choices.end()) {
            throw CoverageError("sequence has no choice for pair '" + m.pair_id + "'");
        }
        check_writable_id(m.pair_id);
        const bool original_first = it->second != m.flipped;
        sink << m.pair_id << ',' << (original_first ? "first" : "second") << '\n';
    }
    check_sink(sink);
}

}  // namespace rankq
