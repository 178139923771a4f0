#include "deid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace deid {

ClassCounts evaluate_tokens(const TokenLabels& gold, const TokenLabels& pred) {
    if (gold.size() != pred.size())
        throw std::invalid_argument("gold and pred label sequences differ in length (" +
                                    std::to_string(gold.size()) + " vs " +
                                    std::to_string(pred.size()) + ")");
    ClassCounts counts;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const Label& g = gold[i];
        const Label& p = pred[i];
        if (g && p) {
            if (*g == *p) {
                ++counts[*g].tp;
            } else {
                ++counts[*p].fp;
                ++counts[*g].fn;
            }
        } else if (p) {
            ++counts[*p].fp;
        } else if (g) {
            ++counts[*g].fn;
        }
    }
    return counts;
}

namespace {

ClassMetrics metrics_from(const Counts& c) {
    ClassMetrics m;
    m.support = c.tp + c.fn;
    if (c.tp + c.fp > 0) {
        m.precision.value = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
        m.precision.defined = true;
    }
    if (c.tp + c.fn > 0) {
        m.recall.value = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
        m.recall.defined = true;
    }
    if (m.precision.defined && m.recall.defined &&
        m.precision.value + m.recall.value > 0.0) {
        m.f1.value = 2.0 * m.precision.value * m.recall.value /
                     (m.precision.value + m.recall.value);
        m.f1.defined = true;
    }
    return m;
}

}  // namespace

EvalReport summarize(const ClassCounts& counts) {
    Counts overall;
    for (const auto& c : counts.per_class) overall += c;
    return summarize_with_overall(counts, overall);
}

EvalReport summarize_with_overall(const ClassCounts& counts, const Counts& overall) {
    EvalReport report;
    report.counts = counts;
    report.overall_counts = overall;
    for (std::size_t i = 0; i < kNumCategories; ++i)
        report.per_class[i] = metrics_from(counts.per_class[i]);
    report.overall = metrics_from(overall);
    return report;
}

EvalReport evaluate_corpus(const Corpus& gold, const Corpus& pred, Provenance gold_provenance,
                           Provenance pred_provenance) {
    std::map<std::string, const AnnotatedReport*> pred_by_id;
    for (const auto& r : pred.reports) pred_by_id[r.id] = &r;
    if (pred_by_id.size() != gold.reports.size() || pred.reports.size() != gold.reports.size())
        throw std::invalid_argument("gold and pred corpora have different report sets");

    ClassCounts counts;
    for (const auto& g : gold.reports) {
        auto it = pred_by_id.find(g.id);
        if (it == pred_by_id.end())
            throw std::invalid_argument("report '" + g.id + "' missing from pred corpus");
        const AnnotatedReport& p = *it->second;
        if (p.text != g.text)
            throw std::invalid_argument("report '" + g.id + "': gold and pred texts differ");
        TokenSeq seq = tokenize(g.text);
        TokenLabels gl = spans_to_token_labels(g.spans_with(gold_provenance), seq);
        TokenLabels pl = spans_to_token_labels(p.spans_with(pred_provenance), seq);
        counts += evaluate_tokens(gl, pl);
    }
    return summarize(counts);
}

namespace {

CiStat ci_of(std::vector<double> values, std::size_t excluded, CiMethod method) {
    CiStat s;
    s.excluded = excluded;
    s.n = values.size();
    if (values.empty()) return s;
    s.defined = true;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    if (method == CiMethod::NORMAL) {
        double half = values.size() >= 2
                          ? 1.96 * s.sd / std::sqrt(static_cast<double>(values.size()))
                          : 0.0;
        s.lo = std::max(0.0, s.mean - half);
        s.hi = std::min(1.0, s.mean + half);
    } else {
        // Percentile bootstrap, fixed seed for reproducibility.
        constexpr int kResamples = 2000;
        std::mt19937_64 rng(0x5eed);
        std::vector<double> means;
        means.reserve(kResamples);
        for (int b = 0; b < kResamples; ++b) {
            double bs = 0.0;
            for (std::size_t i = 0; i < values.size(); ++i)
                bs += values[rng() % values.size()];
            means.push_back(bs / static_cast<double>(values.size()));
        }
        std::sort(means.begin(), means.end());
        s.lo = means[static_cast<std::size_t>(0.025 * (kResamples - 1))];
        s.hi = means[static_cast<std::size_t>(0.975 * (kResamples - 1))];
    }
    return s;
}

CiStat aggregate_metric(const std::vector<EvalReport>& reports,
                        Metric ClassMetrics::*metric,
                        const ClassMetrics& (*select)(const EvalReport&, std::size_t),
                        std::size_t idx, CiMethod method) {
    std::vector<double> values;
    std::size_t excluded = 0;
    for (const auto& r : reports) {
        const ClassMetrics& cm = select(r, idx);
        const Metric& m = cm.*metric;
        if (m.defined)
            values.push_back(m.value);
        else
            ++excluded;
    }
    return ci_of(std::move(values), excluded, method);
}

const ClassMetrics& select_class(const EvalReport& r, std::size_t i) { return r.per_class[i]; }
const ClassMetrics& select_overall(const EvalReport& r, std::size_t) { return r.overall; }

}  // namespace

CiReport aggregate_runs(const std::vector<EvalReport>& reports, CiMethod method) {
    if (reports.empty()) throw std::invalid_argument("aggregate_runs: no reports");
    CiReport ci;
    ci.runs = reports.size();
    ci.method = method;
    for (std::size_t i = 0; i < kNumCategories; ++i) {
        ci.per_class[i].precision =
            aggregate_metric(reports, &ClassMetrics::precision, select_class, i, method);
        ci.per_class[i].recall =
            aggregate_metric(reports, &ClassMetrics::recall, select_class, i, method);
        ci.per_class[i].f1 = aggregate_metric(reports, &ClassMetrics::f1, select_class, i, method);
        ci.per_class[i].present =
            std::any_of(reports.begin(), reports.end(),
                        [i](const EvalReport& r) { return r.per_class[i].present; });
    }
    ci.overall.precision =
        aggregate_metric(reports, &ClassMetrics::precision, select_overall, 0, method);
    ci.overall.recall = aggregate_metric(reports, &ClassMetrics::recall, select_overall, 0, method);
    ci.overall.f1 = aggregate_metric(reports, &ClassMetrics::f1, select_overall, 0, method);
    return ci;
}

namespace {

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string format_metric(const Metric& m, bool present) {
    if (!present || !m.defined) return "--";
    return fmt3(m.value);
}

void append_row(std::ostringstream& out, const std::string& a, const std::string& b,
                const std::string& c, const std::string& d, const std::string& e, int wa, int wb) {
    out << a;
    for (int i = static_cast<int>(a.size()); i < wa; ++i) out << ' ';
    out << b;
    for (int i = static_cast<int>(b.size()); i < wb; ++i) out << ' ';
    // CI cells contain a multibyte dash; pad on rendered width.
    auto width = [](const std::string& s) {
        std::size_t w = 0;
        for (char ch : s)
            if ((static_cast<unsigned char>(ch) & 0xC0) != 0x80) ++w;
        return static_cast<int>(w);
    };
    out << c;
    for (int i = width(c); i < 22; ++i) out << ' ';
    out << d;
    for (int i = width(d); i < 22; ++i) out << ' ';
    out << e << '\n';
}

}  // namespace

std::string format_ci_cell(const CiStat& stat) {
    if (!stat.defined) return "--";
    return fmt3(stat.mean) + " [" + fmt3(stat.lo) + "–" + fmt3(stat.hi) + "]";
}

std::string render_eval_table(const EvalReport& report) {
    std::ostringstream out;
    append_row(out, "PHI Class", "", "Precision", "Recall", "F1", 10, 0);
    auto row = [&](const std::string& name, const ClassMetrics& m) {
        append_row(out, name, "", format_metric(m.precision, m.present),
                   format_metric(m.recall, m.present), format_metric(m.f1, m.present), 10, 0);
    };
    row("Overall", report.overall);
    for (PhiCategory c : kAllCategories) row(std::string(to_string(c)), report.for_category(c));
    return out.str();
}

std::string render_ci_table(const CiReport& report) {
    std::ostringstream out;
    append_row(out, "PHI Class", "", "Precision", "Recall", "F1", 10, 0);
    auto cell = [](const ClassCi& m, const CiStat& s) {
        return m.present ? format_ci_cell(s) : std::string("--");
    };
    auto row = [&](const std::string& name, const ClassCi& m) {
        append_row(out, name, "", cell(m, m.precision), cell(m, m.recall), cell(m, m.f1), 10, 0);
    };
    row("Overall", report.overall);
    for (PhiCategory c : kAllCategories) row(std::string(to_string(c)), report.for_category(c));
    return out.str();
}

std::string render_comparison(const std::vector<std::pair<std::string, EvalReport>>& systems) {
    std::ostringstream out;
    int name_w = 10;
    for (const auto& [name, _] : systems)
        name_w = std::max(name_w, static_cast<int>(name.size()) + 2);
    append_row(out, "Class", "Model", "Precision", "Recall", "F1", 10, name_w);
    auto rows = [&](const std::string& cls,
                    const ClassMetrics& (*get)(const EvalReport&, std::size_t), std::size_t idx) {
        bool first = true;
        for (const auto& [name, rep] : systems) {
            const ClassMetrics& m = get(rep, idx);
            append_row(out, first ? cls : "", name, format_metric(m.precision, m.present),
                       format_metric(m.recall, m.present), format_metric(m.f1, m.present), 10,
                       name_w);
            first = false;
        }
    };
    rows("Overall", select_overall, 0);
    for (PhiCategory c : kAllCategories)
        rows(std::string(to_string(c)), select_class, static_cast<std::size_t>(c));
    return out.str();
}

namespace {

using json = nlohmann::ordered_json;

json metric_json(const Metric& m, bool present) {
    if (!present || !m.defined) return nullptr;
    return m.value;
}

json class_metrics_json(const ClassMetrics& m) {
    json j;
    j["precision"] = metric_json(m.precision, m.present);
    j["recall"] = metric_json(m.recall, m.present);
    j["f1"] = metric_json(m.f1, m.present);
    j["support"] = m.support;
    j["present"] = m.present;
    return j;
}

json ci_stat_json(const CiStat& s, bool present) {
    json j;
    if (!present || !s.defined) {
        j["mean"] = nullptr;
        return j;
    }
    j["mean"] = s.mean;
    j["sd"] = s.sd;
    j["ci95"] = json::array({s.lo, s.hi});
    j["n"] = s.n;
    j["excluded"] = s.excluded;
    return j;
}

}  // namespace

std::string eval_report_to_json(const EvalReport& report) {
    json j;
    j["overall"] = class_metrics_json(report.overall);
    json classes = json::object();
    for (PhiCategory c : kAllCategories)
        classes[std::string(to_string(c))] = class_metrics_json(report.for_category(c));
    j["classes"] = classes;
    json counts = json::object();
    for (PhiCategory c : kAllCategories) {
        const Counts& cc = report.counts[c];
        counts[std::string(to_string(c))] =
            json{{"tp", cc.tp}, {"fp", cc.fp}, {"fn", cc.fn}};
    }
    j["counts"] = counts;
    return j.dump(2);
}

std::string ci_report_to_json(const CiReport& report) {
    json j;
    j["runs"] = report.runs;
    j["method"] = report.method == CiMethod::NORMAL ? "normal" : "bootstrap";
    auto cls = [](const ClassCi& c) {
        json m;
        m["precision"] = ci_stat_json(c.precision, c.present);
        m["recall"] = ci_stat_json(c.recall, c.present);
        m["f1"] = ci_stat_json(c.f1, c.present);
        return m;
    };
    j["overall"] = cls(report.overall);
    json classes = json::object();
    for (PhiCategory c : kAllCategories)
        classes[std::string(to_string(c))] = cls(report.for_category(c));
    j["classes"] = classes;
    return j.dump(2);
}

}  // namespace deid
