#include "core/dataio.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "core/error.hpp"

namespace sign {

namespace {

[[noreturn]] void line_fail(const std::string& path, std::size_t line, const std::string& msg) {
    fail(ErrorCode::Parse, path + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> read_data_lines(const std::string& path,
                                         std::vector<std::size_t>* line_numbers) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const std::size_t last = line.find_last_not_of(" \t\r");
        const std::string trimmed = line.substr(first, last - first + 1);
        if (trimmed[0] == '#') continue;
        lines.push_back(trimmed);
        if (line_numbers != nullptr) line_numbers->push_back(lineno);
    }
    return lines;
}

std::size_t parse_index(const std::string& tok, const std::string& path, std::size_t line) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
    if (errno != 0 || end != tok.c_str() + tok.size() || tok.empty() ||
        tok[0] == '-')
        line_fail(path, line, "malformed index '" + tok + "'");
    return static_cast<std::size_t>(v);
}

} // namespace

Labels load_labels(const std::string& path) {
    std::vector<std::size_t> linenos;
    const std::vector<std::string> lines = read_data_lines(path, &linenos);
    require(!lines.empty(), ErrorCode::Parse, path + ": labels file has no data lines");

    Labels out;
    const bool multilabel = lines[0].find(',') != std::string::npos;
    out.task = multilabel ? TaskKind::Multilabel : TaskKind::Multiclass;

    if (!multilabel) {
        out.classes.reserve(lines.size());
        std::size_t max_class = 0;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const std::size_t c = parse_index(lines[i], path, linenos[i]);
            out.classes.push_back(c);
            max_class = std::max(max_class, c);
        }
        out.num_classes = max_class + 1;
        return out;
    }

    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::vector<double> row;
        std::stringstream ss(lines[i]);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const std::size_t first = tok.find_first_not_of(" \t");
            if (first == std::string::npos) line_fail(path, linenos[i], "empty label field");
            const std::size_t last = tok.find_last_not_of(" \t");
            tok = tok.substr(first, last - first + 1);
            if (tok != "0" && tok != "1")
                line_fail(path, linenos[i], "multilabel field must be 0 or 1, got '" + tok + "'");
            row.push_back(tok == "1" ? 1.0 : 0.0);
        }
        if (i == 0) {
            width = row.size();
            require(width >= 1, ErrorCode::Parse, path + ": empty multilabel row");
        } else if (row.size() != width) {
            line_fail(path, linenos[i],
                      "multilabel row width " + std::to_string(row.size()) +
                          " != " + std::to_string(width));
        }
        rows.push_back(std::move(row));
    }
    out.num_classes = width;
    out.indicator = DenseMatrix(rows.size(), width, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), out.indicator.row(i));
    return out;
}

void save_labels(const Labels& labels, const std::string& path) {
    std::string text;
    if (labels.task == TaskKind::Multiclass) {
        for (std::size_t c : labels.classes) text += std::to_string(c) + "\n";
    } else {
        for (std::size_t i = 0; i < labels.indicator.n_rows; ++i) {
            const double* row = labels.indicator.row(i);
            for (std::size_t j = 0; j < labels.indicator.n_cols; ++j) {
                if (j > 0) text += ',';
                text += row[j] != 0.0 ? '1' : '0';
            }
            text += '\n';
        }
    }
    write_file_bytes_atomic(path, text.data(), text.size());
}

Splits load_splits(const std::string& path) {
    std::vector<std::size_t> linenos;
    const std::vector<std::string> lines = read_data_lines(path, &linenos);

    Splits out;
    bool seen_train = false, seen_val = false, seen_test = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::istringstream ss(lines[i]);
        std::string head;
        ss >> head;
        std::vector<std::size_t>* target = nullptr;
        if (head == "train:") {
            if (seen_train) line_fail(path, linenos[i], "duplicate train: line");
            seen_train = true;
            target = &out.train;
        } else if (head == "val:") {
            if (seen_val) line_fail(path, linenos[i], "duplicate val: line");
            seen_val = true;
            target = &out.val;
        } else if (head == "test:") {
            if (seen_test) line_fail(path, linenos[i], "duplicate test: line");
            seen_test = true;
            target = &out.test;
        } else {
            line_fail(path, linenos[i], "expected train:/val:/test: line, got '" + head + "'");
        }
        std::string tok;
        while (ss >> tok) {
            if (tok == "-") {
                if (!target->empty()) line_fail(path, linenos[i], "'-' mixed with indices");
                break;
            }
            target->push_back(parse_index(tok, path, linenos[i]));
        }
    }
    require(seen_train && seen_val && seen_test, ErrorCode::Parse,
            path + ": splits file must contain train:, val:, and test: lines");
    return out;
}

void save_splits(const Splits& s, const std::string& path) {
    const auto emit = [](const char* name, const std::vector<std::size_t>& idx) {
        std::string line = name;
        if (idx.empty()) {
            line += " -";
        } else {
            for (std::size_t v : idx) line += " " + std::to_string(v);
        }
        return line + "\n";
    };
    const std::string text =
        emit("train:", s.train) + emit("val:", s.val) + emit("test:", s.test);
    write_file_bytes_atomic(path, text.data(), text.size());
}

void validate_splits(const Splits& s, std::size_t num_nodes) {
    require(!s.train.empty(), ErrorCode::InvalidArgument, "train split is empty");
    std::unordered_set<std::size_t> seen;
    const auto check = [&](const std::vector<std::size_t>& idx, const char* name) {
        for (std::size_t v : idx) {
            require(v < num_nodes, ErrorCode::InvalidArgument,
                    std::string(name) + " split index " + std::to_string(v) +
                        " out of range for " + std::to_string(num_nodes) + " nodes");
            require(seen.insert(v).second, ErrorCode::InvalidArgument,
                    "split index " + std::to_string(v) + " appears in more than one split");
        }
    };
    check(s.train, "train");
    check(s.val, "val");
    check(s.test, "test");
}

void save_predictions(const DenseMatrix& preds, TaskKind task, const std::string& path) {
    Labels as_labels;
    as_labels.task = task;
    if (task == TaskKind::Multiclass) {
        require(preds.n_cols == 1, ErrorCode::InvalidArgument,
                "multiclass predictions must be one column");
        as_labels.num_classes = 0;
        as_labels.classes.reserve(preds.n_rows);
        for (std::size_t i = 0; i < preds.n_rows; ++i)
            as_labels.classes.push_back(static_cast<std::size_t>(preds.at(i, 0)));
    } else {
        as_labels.num_classes = preds.n_cols;
        as_labels.indicator = preds;
    }
    save_labels(as_labels, path);
}

} // namespace sign
