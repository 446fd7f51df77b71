#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "anticent/common.hpp"
#include "anticent/graph.hpp"

namespace anticent {

struct ParseOptions {
    char delimiter = ',';
    bool strict = true; // strict: any malformed row fails the whole parse
};

struct RowIssue {
    std::size_t line = 0; // 1-based, counting every physical line
    std::string field;
    std::string message;
};

struct ParseResult {
    std::vector<TransactionEdge> edges;
    std::vector<RowIssue> issues;    // malformed rows (lenient mode only)
    std::size_t self_loops_rejected = 0;
    std::size_t rows_seen = 0;
};

struct ParseError : DataError {
    ParseError(std::string msg, std::vector<RowIssue> iss)
        : DataError(std::move(msg)), issues(std::move(iss)) {}
    std::vector<RowIssue> issues;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                          s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() &&
           (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line,
                                           char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == delim) {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

inline bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    std::string buf(s);
    char* end = nullptr;
    out = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size();
}

} // namespace detail

// Reads a header-bearing delimited table with columns source, target,
// tx_count, total_amount, start_year, end_year (any column order). Lines
// starting with '#' are ignored, which lets pipeline artifacts carry a
// provenance comment and still round-trip through this parser.
inline ParseResult parse_edge_list(std::istream& in,
                                   const ParseOptions& opts = {}) {
    ParseResult result;
    std::string line;
    std::size_t line_no = 0;

    // Header row.
    int col[6] = {-1, -1, -1, -1, -1, -1};
    static const char* names[6] = {"source",     "target",     "tx_count",
                                   "total_amount", "start_year", "end_year"};
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto cols = detail::split(t, opts.delimiter);
        for (std::size_t i = 0; i < cols.size(); ++i)
            for (int f = 0; f < 6; ++f)
                if (cols[i] == names[f]) col[f] = static_cast<int>(i);
        for (int f = 0; f < 6; ++f)
            if (col[f] < 0)
                throw ParseError(std::string("missing column '") + names[f] +
                                     "' in header (line " +
                                     std::to_string(line_no) + ")",
                                 {});
        have_header = true;
        break;
    }
    if (!have_header)
        throw ParseError("empty input: no header row found", {});

    const std::size_t min_cols =
        static_cast<std::size_t>(*std::max_element(col, col + 6)) + 1;

    while (std::getline(in, line)) {
        ++line_no;
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        ++result.rows_seen;

        const auto cols = detail::split(t, opts.delimiter);
        auto bad = [&](const char* field, std::string msg) {
            result.issues.push_back({line_no, field, std::move(msg)});
        };
        if (cols.size() < min_cols) {
            bad("", "expected at least " + std::to_string(min_cols) +
                        " columns, got " + std::to_string(cols.size()));
            continue;
        }

        TransactionEdge e;
        std::int64_t tx_count = 0;
        bool ok = true;
        if (!detail::parse_number(cols[col[0]], e.source)) {
            bad("source", "not an integer: '" + std::string(cols[col[0]]) + "'");
            ok = false;
        }
        if (!detail::parse_number(cols[col[1]], e.target)) {
            bad("target", "not an integer: '" + std::string(cols[col[1]]) + "'");
            ok = false;
        }
        if (!detail::parse_number(cols[col[2]], tx_count) || tx_count < 1) {
            bad("tx_count",
                "not a positive integer: '" + std::string(cols[col[2]]) + "'");
            ok = false;
        }
        if (!detail::parse_double(cols[col[3]], e.total_amount) ||
            !(e.total_amount > 0.0)) {
            bad("total_amount",
                "not a positive number: '" + std::string(cols[col[3]]) + "'");
            ok = false;
        }
        if (!detail::parse_number(cols[col[4]], e.start_year)) {
            bad("start_year",
                "not an integer: '" + std::string(cols[col[4]]) + "'");
            ok = false;
        }
        if (!detail::parse_number(cols[col[5]], e.end_year)) {
            bad("end_year",
                "not an integer: '" + std::string(cols[col[5]]) + "'");
            ok = false;
        }
        if (ok && e.start_year > e.end_year) {
            bad("start_year", "start_year exceeds end_year");
            ok = false;
        }
        if (!ok) continue;
        e.tx_count = static_cast<std::uint64_t>(tx_count);

        if (e.source == e.target) {
            ++result.self_loops_rejected;
            continue;
        }
        result.edges.push_back(e);
    }

    if (opts.strict && !result.issues.empty()) {
        std::ostringstream msg;
        msg << result.issues.size() << " malformed row(s); lines:";
        for (const auto& i : result.issues) msg << ' ' << i.line;
        throw ParseError(msg.str(), std::move(result.issues));
    }
    return result;
}

inline ParseResult parse_edge_list_file(const std::string& path,
                                        const ParseOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open edge list: " + path);
    return parse_edge_list(in, opts);
}

struct CleanRules {
    double max_avg_amount = 10000.0; // strict upper bound on total/tx_count
    bool require_same_year = true;
};

// Keeps edges whose per-pair average amount is strictly below the threshold
// and (by default) whose first and last transaction fall in the same year.
inline std::vector<TransactionEdge>
clean_filter(const std::vector<TransactionEdge>& edges,
             const CleanRules& rules = {}) {
    std::vector<TransactionEdge> kept;
    kept.reserve(edges.size());
    for (const auto& e : edges) {
        if (!(e.average_amount() < rules.max_avg_amount)) continue;
        if (rules.require_same_year && e.start_year != e.end_year) continue;
        kept.push_back(e);
    }
    return kept;
}

inline void write_edge_row(std::ostream& out, const TransactionEdge& e,
                           char delim) {
    char buf[64];
    out << e.source << delim << e.target << delim << e.tx_count << delim;
    std::snprintf(buf, sizeof(buf), "%.17g", e.total_amount);
    out << buf << delim << e.start_year << delim << e.end_year << '\n';
}

// Writes the same format parse_edge_list reads. Comment lines (if any) are
// emitted before the header, prefixed with '#'.
inline void write_edge_list(std::ostream& out,
                            const std::vector<TransactionEdge>& edges,
                            char delim = ',',
                            const std::vector<std::string>& comments = {}) {
    for (const auto& c : comments) out << "# " << c << '\n';
    out << "source" << delim << "target" << delim << "tx_count" << delim
        << "total_amount" << delim << "start_year" << delim << "end_year"
        << '\n';
    for (const auto& e : edges) write_edge_row(out, e, delim);
}

inline std::vector<TransactionEdge> graph_to_edges(const TxGraph& g) {
    std::vector<TransactionEdge> edges;
    edges.reserve(g.edge_count());
    g.for_each_edge([&](NodeId u, NodeId v, double w, std::uint64_t c) {
        TransactionEdge e;
        e.source = g.token_of(u);
        e.target = g.token_of(v);
        e.total_amount = w;
        e.tx_count = c;
        edges.push_back(e);
    });
    return edges;
}

} // namespace anticent
