#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "activedp/core.hpp"
#include "activedp/error.hpp"
#include "activedp/featurize.hpp"

namespace activedp {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int parse_binary_label(const nlohmann::json& v, std::size_t line) {
    if (v.is_number_integer()) {
        const auto y = v.get<long long>();
        if (y == 0 || y == 1) return static_cast<int>(y);
    }
    throw ParseError("unknown label value " + v.dump(), line);
}

int parse_binary_label(std::string_view cell, std::size_t line) {
    if (cell == "0") return 0;
    if (cell == "1") return 1;
    throw ParseError("unknown label value '" + std::string(cell) + "'", line);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            cells.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return cells;
}

std::string format_cell(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Dataset parse_text_jsonl(const std::string& content) {
    std::vector<Instance> instances;
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
        }
        if (!row.is_object() || !row.contains("id") || !row.contains("text") || !row.contains("label"))
            throw ParseError("expected object with id, text and label", lineno);
        if (!row["id"].is_number_integer()) throw ParseError("id must be an integer", lineno);
        if (!row["text"].is_string()) throw ParseError("text must be a string", lineno);
        Instance x;
        x.id = row["id"].get<std::int64_t>();
        auto text = row["text"].get<std::string>();
        auto tokens = tokenize(text);
        x.payload = TextPayload{std::move(text), std::move(tokens)};
        x.true_label = parse_binary_label(row["label"], lineno);
        instances.push_back(std::move(x));
    }
    try {
        return Dataset(DataKind::text, 2, std::move(instances));
    } catch (const UsageError& e) {
        throw ParseError(e.what(), lineno);
    }
}

Dataset parse_tabular_csv(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> names;
    std::vector<Instance> instances;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (names.empty()) {
            if (cells.size() < 2 || cells.back() != "label")
                throw ParseError("header must end with a 'label' column after at least one feature", lineno);
            for (std::size_t j = 0; j + 1 < cells.size(); ++j) names.emplace_back(cells[j]);
            continue;
        }
        if (cells.size() != names.size() + 1)
            throw ParseError("expected " + std::to_string(names.size() + 1) + " cells, got " +
                                 std::to_string(cells.size()), lineno);
        FeatureVector f(names.size());
        for (std::size_t j = 0; j < names.size(); ++j) {
            const auto cell = cells[j];
            if (cell.empty()) throw ParseError("missing value in column '" + names[j] + "'", lineno);
            const auto* end = cell.data() + cell.size();
            const auto res = std::from_chars(cell.data(), end, f[j]);
            if (res.ec != std::errc() || res.ptr != end || !std::isfinite(f[j]))
                throw ParseError("non-numeric value '" + std::string(cell) + "' in column '" + names[j] + "'",
                                 lineno);
        }
        Instance x;
        x.id = static_cast<std::int64_t>(instances.size());
        x.payload = std::move(f);
        x.true_label = parse_binary_label(cells.back(), lineno);
        instances.push_back(std::move(x));
    }
    if (names.empty()) throw ParseError("missing header", lineno);
    return Dataset(DataKind::tabular, 2, std::move(instances), std::move(names));
}

Dataset load_text_jsonl(const std::filesystem::path& path) { return parse_text_jsonl(read_file(path)); }

Dataset load_tabular_csv(const std::filesystem::path& path) { return parse_tabular_csv(read_file(path)); }

void save_text_jsonl(const Dataset& d, const std::filesystem::path& path) {
    if (d.kind() != DataKind::text) throw UsageError("save_text_jsonl needs a text dataset");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path.string());
    for (const auto& x : d.instances()) {
        nlohmann::json row{{"id", x.id}, {"text", x.text().text}};
        row["label"] = x.true_label ? nlohmann::json(*x.true_label) : nlohmann::json(nullptr);
        out << row.dump() << '\n';
    }
}

void save_tabular_csv(const Dataset& d, const std::filesystem::path& path) {
    if (d.kind() != DataKind::tabular) throw UsageError("save_tabular_csv needs a tabular dataset");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path.string());
    for (const auto& n : d.feature_names()) out << n << ',';
    out << "label\n";
    for (const auto& x : d.instances()) {
        for (double v : x.features()) out << format_cell(v) << ',';
        out << (x.true_label ? std::to_string(*x.true_label) : std::string()) << '\n';
    }
}

}  // namespace activedp
