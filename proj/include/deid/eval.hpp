#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "deid/corpus.hpp"
#include "deid/segment.hpp"

namespace deid {

struct Counts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    Counts& operator+=(const Counts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
    bool operator==(const Counts&) const = default;
};

// Token-level confusion counts per PHI class, indexed by PhiCategory.
struct ClassCounts {
    std::array<Counts, kNumCategories> per_class{};

    Counts& operator[](PhiCategory c) { return per_class[static_cast<std::size_t>(c)]; }
    const Counts& operator[](PhiCategory c) const {
        return per_class[static_cast<std::size_t>(c)];
    }
    ClassCounts& operator+=(const ClassCounts& o) {
        for (std::size_t i = 0; i < kNumCategories; ++i) per_class[i] += o.per_class[i];
        return *this;
    }
    bool operator==(const ClassCounts&) const = default;
};

// A metric value that may be undefined (division by zero); undefined values
// render as "--" and are never silently zero.
struct Metric {
    double value = 0.0;
    bool defined = false;
};

struct ClassMetrics {
    Metric precision;
    Metric recall;
    Metric f1;
    std::size_t support = 0;  // gold token count (tp + fn)
    bool present = true;      // false for categories a system cannot map at all
};

struct EvalReport {
    std::array<ClassMetrics, kNumCategories> per_class{};
    ClassMetrics overall;  // micro-averaged over PHI classes
    ClassCounts counts;
    Counts overall_counts;

    ClassMetrics& for_category(PhiCategory c) {
        return per_class[static_cast<std::size_t>(c)];
    }
    const ClassMetrics& for_category(PhiCategory c) const {
        return per_class[static_cast<std::size_t>(c)];
    }
};

// Per token: gold=c,pred=c -> TP(c); gold=O,pred=c -> FP(c); gold=c,pred=O ->
// FN(c); gold=c,pred=c' with c!=c' -> FP(c') and FN(c). Throws on length
// mismatch.
ClassCounts evaluate_tokens(const TokenLabels& gold, const TokenLabels& pred);

// P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R). Overall is micro-averaged
// from summed per-class counts.
EvalReport summarize(const ClassCounts& counts);

// Like summarize but with an explicitly supplied overall count (used where
// dual-mapped vendor rows must not be double counted in the overall row).
EvalReport summarize_with_overall(const ClassCounts& counts, const Counts& overall);

// Tokenizes each report once and compares the two provenances token by
// token; counts are summed corpus-wide. Report ids must match.
EvalReport evaluate_corpus(const Corpus& gold, const Corpus& pred, Provenance gold_provenance,
                           Provenance pred_provenance);

struct CiStat {
    double mean = 0.0;
    double sd = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 0;         // runs with the metric defined
    std::size_t excluded = 0;  // runs where the metric was undefined
    bool defined = false;
};

struct ClassCi {
    CiStat precision;
    CiStat recall;
    CiStat f1;
    bool present = true;
};

enum class CiMethod { NORMAL, BOOTSTRAP };

struct CiReport {
    std::array<ClassCi, kNumCategories> per_class{};
    ClassCi overall;
    std::size_t runs = 0;
    CiMethod method = CiMethod::NORMAL;

    const ClassCi& for_category(PhiCategory c) const {
        return per_class[static_cast<std::size_t>(c)];
    }
};

// Mean, sample standard deviation and 95% CI per metric across runs.
// NORMAL: mean +/- 1.96*sd/sqrt(n), clipped to [0,1]. BOOTSTRAP: percentile
// bootstrap with a fixed seed. Undefined runs are excluded per metric.
CiReport aggregate_runs(const std::vector<EvalReport>& reports,
                        CiMethod method = CiMethod::NORMAL);

// Fixed-width text tables: class rows with P/R/F1 columns; undefined or
// absent cells render "--"; CI cells render "m [lo–hi]" with 3 decimals.
std::string render_eval_table(const EvalReport& report);
std::string render_ci_table(const CiReport& report);
std::string render_comparison(const std::vector<std::pair<std::string, EvalReport>>& systems);

// "m [lo–hi]" with 3 decimal places, or "--" when undefined.
std::string format_ci_cell(const CiStat& stat);

// JSON serialization (deterministic field order).
std::string eval_report_to_json(const EvalReport& report);
std::string ci_report_to_json(const CiReport& report);

}  // namespace deid
