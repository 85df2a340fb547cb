#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "trainers.hpp"

namespace adact {

enum class TaskKind { Approximation, Classification };

inline const char* task_kind_name(TaskKind k) {
    return k == TaskKind::Approximation ? "approximation" : "classification";
}

inline TaskKind task_kind_from_name(const std::string& name) {
    if (name == "approximation") return TaskKind::Approximation;
    if (name == "classification") return TaskKind::Classification;
    throw Error("unknown task kind '" + name + "'");
}

/// Pattern matrix X (N_v x N) and target matrix T (N_v x M). Classification
/// targets are one-hot rows.
struct Dataset {
    Matrix X;
    Matrix T;
    TaskKind kind = TaskKind::Approximation;
    std::vector<std::string> names;  ///< optional column labels, inputs then targets

    std::size_t patterns() const { return X.rows(); }
};

// ---------------------------------------------------------------------------
// Generators

constexpr double kPi = 3.14159265358979323846;

struct SinePair {
    Dataset train;
    Dataset test;
};

// Training inputs uniform on [0, 4*pi], test inputs uniform on [0, 2*pi],
// targets sin(x) for both.
inline SinePair gen_sine(std::size_t n_train, std::size_t n_test, std::uint32_t seed) {
    if (n_train < 1 || n_test < 1) throw Error("gen_sine needs at least one sample per split");
    std::mt19937 rng(seed);
    SinePair out;
    auto fill = [&rng](Dataset& d, std::size_t n, double hi) {
        std::uniform_real_distribution<double> u(0.0, hi);
        d.X = Matrix(n, 1);
        d.T = Matrix(n, 1);
        d.kind = TaskKind::Approximation;
        d.names = {"x", "sin_x"};
        for (std::size_t p = 0; p < n; ++p) {
            const double x = u(rng);
            d.X(p, 0) = x;
            d.T(p, 0) = std::sin(x);
        }
    };
    fill(out.train, n_train, 4.0 * kPi);
    fill(out.test, n_test, 2.0 * kPi);
    return out;
}

inline double rosenbrock(double x1, double x2) {
    const double a = 1.0 - x1;
    const double b = x2 - x1 * x1;
    return a * a + 100.0 * b * b;
}

// Inputs uniform on [-2, 2]^2, target the Rosenbrock valley value.
inline Dataset gen_rosenbrock(std::size_t n, std::uint32_t seed) {
    if (n < 1) throw Error("gen_rosenbrock needs at least one sample");
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Dataset d;
    d.X = Matrix(n, 2);
    d.T = Matrix(n, 1);
    d.kind = TaskKind::Approximation;
    d.names = {"x1", "x2", "rosenbrock"};
    for (std::size_t p = 0; p < n; ++p) {
        const double x1 = u(rng);
        const double x2 = u(rng);
        d.X(p, 0) = x1;
        d.X(p, 1) = x2;
        d.T(p, 0) = rosenbrock(x1, x2);
    }
    return d;
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace detail {

inline bool parse_double(const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    return *end == '\0' && std::isfinite(out);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace detail

// Comma-delimited numeric rows of n_inputs + n_outputs fields. An optional
// header is detected by a non-numeric first row. For classification data the
// last field is an integer class label and n_outputs must be 1; labels are
// mapped to one-hot columns in ascending order.
inline Dataset load_csv(const std::string& path, std::size_t n_inputs, std::size_t n_outputs,
                        TaskKind kind) {
    if (n_inputs < 1 || n_outputs < 1) throw Error("load_csv needs positive column counts");
    if (kind == TaskKind::Classification && n_outputs != 1)
        throw Error("classification CSV input carries one label column");
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");

    const std::size_t want = n_inputs + n_outputs;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> row_lines;
    std::vector<std::string> names;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        if (line_no == 1) {
            double probe;
            if (!detail::parse_double(fields.front(), probe)) {
                if (fields.size() != want)
                    throw ParseError(line_no, "header has " + std::to_string(fields.size()) +
                                                  " fields, expected " + std::to_string(want));
                names = fields;
                continue;
            }
        }
        if (fields.size() != want)
            throw ParseError(line_no, "expected " + std::to_string(want) + " fields, got " +
                                          std::to_string(fields.size()));
        std::vector<double> row(want);
        for (std::size_t i = 0; i < want; ++i)
            if (!detail::parse_double(fields[i], row[i]))
                throw ParseError(line_no, "field " + std::to_string(i + 1) + " ('" + fields[i] +
                                              "') is not numeric");
        rows.push_back(std::move(row));
        row_lines.push_back(line_no);
    }
    if (rows.empty()) throw ParseError(line_no, "no data rows");

    Dataset d;
    d.kind = kind;
    d.names = std::move(names);
    const std::size_t nv = rows.size();
    d.X = Matrix(nv, n_inputs);
    for (std::size_t p = 0; p < nv; ++p)
        for (std::size_t j = 0; j < n_inputs; ++j) d.X(p, j) = rows[p][j];

    if (kind == TaskKind::Approximation) {
        d.T = Matrix(nv, n_outputs);
        for (std::size_t p = 0; p < nv; ++p)
            for (std::size_t i = 0; i < n_outputs; ++i) d.T(p, i) = rows[p][n_inputs + i];
        return d;
    }

    std::vector<long long> labels(nv);
    std::vector<long long> distinct;
    for (std::size_t p = 0; p < nv; ++p) {
        const double raw = rows[p][n_inputs];
        const long long lab = static_cast<long long>(std::llround(raw));
        if (std::abs(raw - static_cast<double>(lab)) > 1e-9)
            throw ParseError(row_lines[p],
                             "class label " + std::to_string(raw) + " is not an integer");
        labels[p] = lab;
        distinct.push_back(lab);
    }
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    d.T = Matrix(nv, distinct.size());
    for (std::size_t p = 0; p < nv; ++p) {
        const std::size_t cls = static_cast<std::size_t>(
            std::lower_bound(distinct.begin(), distinct.end(), labels[p]) - distinct.begin());
        d.T(p, cls) = 1.0;
    }
    return d;
}

// ---------------------------------------------------------------------------
// Standardization

struct StandardizeStats {
    std::vector<double> mean;
    std::vector<double> sd;  ///< 1 marks a column left unscaled
};

// Per-input-column z-score using training statistics only; targets are left
// alone. Constant columns are passed through unchanged with a warning.
inline StandardizeStats standardize(Dataset& train, Dataset* test = nullptr) {
    if (train.patterns() == 0) throw EmptyDatasetError();
    const std::size_t n = train.X.cols();
    const std::size_t nv = train.patterns();
    StandardizeStats stats;
    stats.mean.assign(n, 0.0);
    stats.sd.assign(n, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t p = 0; p < nv; ++p) {
            sum += train.X(p, j);
            sum2 += train.X(p, j) * train.X(p, j);
        }
        const double mean = sum / static_cast<double>(nv);
        const double var = std::max(0.0, sum2 / static_cast<double>(nv) - mean * mean);
        const double sd = std::sqrt(var);
        if (sd == 0.0) {
            std::cerr << "adact: input column " << j
                      << " is constant on the training split; left unscaled\n";
            continue;
        }
        stats.mean[j] = mean;
        stats.sd[j] = sd;
    }
    auto apply = [&stats, n](Dataset& d) {
        for (std::size_t p = 0; p < d.patterns(); ++p)
            for (std::size_t j = 0; j < n; ++j)
                d.X(p, j) = (d.X(p, j) - stats.mean[j]) / stats.sd[j];
    };
    apply(train);
    if (test) apply(*test);
    return stats;
}

inline void apply_standardization(Matrix& X, const StandardizeStats& stats) {
    for (std::size_t p = 0; p < X.rows(); ++p)
        for (std::size_t j = 0; j < X.cols(); ++j)
            X(p, j) = (X(p, j) - stats.mean[j]) / stats.sd[j];
}

// ---------------------------------------------------------------------------
// Cross-validation

/// Assignment of every pattern to one of k folds; fold sizes differ by at
/// most one.
struct FoldPlan {
    std::size_t k = 0;
    std::vector<std::size_t> assignments;
};

// Seeded shuffle, then round-robin assignment.
inline FoldPlan make_folds(std::size_t n, std::size_t k, std::uint32_t seed) {
    if (k < 2) throw Error("cross-validation needs k >= 2");
    if (n < k) throw Error("fewer patterns than folds");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    FoldPlan plan;
    plan.k = k;
    plan.assignments.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) plan.assignments[order[i]] = i % k;
    return plan;
}

struct FoldResult {
    double mse = 0.0;
    double pe = 0.0;
};

struct CrossvalReport {
    std::size_t k = 0;
    TaskKind kind = TaskKind::Approximation;
    std::vector<FoldResult> folds;
    double mean_mse = 0.0, std_mse = 0.0;
    double mean_pe = 0.0, std_pe = 0.0;
};

namespace detail {

inline void select_rows(const Matrix& src, const std::vector<std::size_t>& rows, Matrix& dst) {
    dst = Matrix(rows.size(), src.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < src.cols(); ++j) dst(i, j) = src(rows[i], j);
}

inline void mean_std(const std::vector<double>& v, double& mean, double& sd) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(acc / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace detail

// Trains one network per fold (fold f held out for evaluation), each from
// seed + f, and reports the mean and standard deviation of the held-out MSE
// (plus PE for classification). Folds run concurrently up to the thread
// budget; aggregation order is fixed by fold index.
inline CrossvalReport crossval(const TrainConfig& cfg, const Dataset& data, std::size_t k,
                               std::uint32_t seed) {
    const FoldPlan plan = make_folds(data.patterns(), k, seed);
    CrossvalReport report;
    report.k = k;
    report.kind = data.kind;
    report.folds.resize(k);

    std::vector<std::size_t> fold_ids(k);
    std::iota(fold_ids.begin(), fold_ids.end(), 0);
    std::atomic<std::size_t> next{0};
    auto run_fold = [&](std::size_t f) {
        std::vector<std::size_t> train_rows, val_rows;
        for (std::size_t p = 0; p < data.patterns(); ++p)
            (plan.assignments[p] == f ? val_rows : train_rows).push_back(p);
        Dataset train_split, val_split;
        train_split.kind = val_split.kind = data.kind;
        detail::select_rows(data.X, train_rows, train_split.X);
        detail::select_rows(data.T, train_rows, train_split.T);
        detail::select_rows(data.X, val_rows, val_split.X);
        detail::select_rows(data.T, val_rows, val_split.T);
        standardize(train_split, &val_split);

        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = cfg.seed + static_cast<std::uint32_t>(f);
        const TrainOutcome outcome =
            train(fold_cfg, train_split.X, train_split.T, &val_split.X, &val_split.T);
        const ForwardCache vc = forward(outcome.net, val_split.X);
        report.folds[f].mse = mse(vc.Y, val_split.T);
        report.folds[f].pe = pe(vc.Y, val_split.T);
    };

    const unsigned workers = std::min<std::size_t>(thread_budget(), k);
    if (workers <= 1) {
        for (std::size_t f = 0; f < k; ++f) run_fold(f);
    } else {
        auto worker = [&] {
            for (;;) {
                const std::size_t f = next.fetch_add(1);
                if (f >= k) return;
                run_fold(f);
            }
        };
        std::vector<std::thread> pool;
        for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
    }

    std::vector<double> mses(k), pes(k);
    for (std::size_t f = 0; f < k; ++f) {
        mses[f] = report.folds[f].mse;
        pes[f] = report.folds[f].pe;
    }
    detail::mean_std(mses, report.mean_mse, report.std_mse);
    detail::mean_std(pes, report.mean_pe, report.std_pe);
    return report;
}

}  // namespace adact
