#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "deid/commands.hpp"
#include "deid/corpus.hpp"
#include "deid/detect.hpp"
#include "deid/eval.hpp"
#include "deid/segment.hpp"
#include "deid/surrogate.hpp"
#include "deid/vendors.hpp"

namespace py = pybind11;
using namespace deid;

namespace {

py::object metric_obj(const Metric& m, bool present) {
    if (!present || !m.defined) return py::none();
    return py::float_(m.value);
}

py::dict class_metrics_dict(const ClassMetrics& m) {
    py::dict d;
    d["precision"] = metric_obj(m.precision, m.present);
    d["recall"] = metric_obj(m.recall, m.present);
    d["f1"] = metric_obj(m.f1, m.present);
    d["support"] = m.support;
    d["present"] = m.present;
    return d;
}

py::dict eval_report_dict(const EvalReport& r) {
    py::dict d;
    d["overall"] = class_metrics_dict(r.overall);
    py::dict classes;
    for (PhiCategory c : kAllCategories)
        classes[py::str(std::string(to_string(c)))] = class_metrics_dict(r.for_category(c));
    d["classes"] = classes;
    return d;
}

}  // namespace

PYBIND11_MODULE(_phideid, m) {
    m.doc() = "Radiology report de-identification core";

    py::enum_<PhiCategory>(m, "PhiCategory")
        .value("AGE", PhiCategory::AGE)
        .value("DATE", PhiCategory::DATE)
        .value("HCW", PhiCategory::HCW)
        .value("HOSPITAL", PhiCategory::HOSPITAL)
        .value("ID", PhiCategory::ID)
        .value("PATIENT", PhiCategory::PATIENT)
        .value("PHONE", PhiCategory::PHONE)
        .value("VENDOR", PhiCategory::VENDOR);

    py::enum_<Provenance>(m, "Provenance")
        .value("GOLD", Provenance::GOLD)
        .value("PREDICTED", Provenance::PREDICTED)
        .value("SYNTHETIC", Provenance::SYNTHETIC)
        .value("VENDOR", Provenance::VENDOR);

    py::class_<PhiSpan>(m, "PhiSpan")
        .def(py::init([](std::size_t start, std::size_t end, PhiCategory category,
                         Provenance provenance) {
                 return PhiSpan{start, end, category, provenance};
             }),
             py::arg("start"), py::arg("end"), py::arg("category"),
             py::arg("provenance") = Provenance::GOLD)
        .def_readonly("start", &PhiSpan::start)
        .def_readonly("end", &PhiSpan::end)
        .def_readonly("category", &PhiSpan::category)
        .def_readonly("provenance", &PhiSpan::provenance)
        .def("__repr__", [](const PhiSpan& s) {
            return "PhiSpan(" + std::to_string(s.start) + ", " + std::to_string(s.end) + ", " +
                   std::string(to_string(s.category)) + ", " +
                   std::string(to_string(s.provenance)) + ")";
        });

    py::class_<AnnotatedReport>(m, "AnnotatedReport")
        .def(py::init<>())
        .def_readwrite("id", &AnnotatedReport::id)
        .def_readwrite("text", &AnnotatedReport::text)
        .def_readwrite("spans", &AnnotatedReport::spans)
        .def_readwrite("metadata", &AnnotatedReport::metadata)
        .def("spans_with", &AnnotatedReport::spans_with);

    py::class_<Corpus>(m, "Corpus")
        .def(py::init<>())
        .def_readwrite("name", &Corpus::name)
        .def_readwrite("reports", &Corpus::reports);

    m.def("load_corpus", &load_corpus, py::arg("path"));
    m.def("save_corpus", &save_corpus, py::arg("corpus"), py::arg("path"));
    m.def("validate_report", &validate_report, py::arg("report"));

    py::class_<Token>(m, "Token")
        .def_readonly("start", &Token::start)
        .def_readonly("end", &Token::end)
        .def_readonly("text", &Token::text);

    py::class_<TokenSeq>(m, "TokenSeq")
        .def_readonly("tokens", &TokenSeq::tokens)
        .def_readonly("source_length", &TokenSeq::source_length)
        .def("__len__", &TokenSeq::size);

    m.def("tokenize", &tokenize, py::arg("text"));
    m.def("split_sentences", &split_sentences, py::arg("text"));

    py::class_<RuleSet>(m, "RuleSet")
        .def_static("load", &RuleSet::load, py::arg("path"))
        .def_static("from_json", &RuleSet::from_json, py::arg("json_text"));

    py::class_<Detector>(m, "Detector")
        .def("detect", &Detector::detect, py::arg("text"))
        .def("name", &Detector::name);
    py::class_<RuleDetector, Detector>(m, "RuleDetector").def(py::init<RuleSet>());
    py::class_<RemoteEndpoint>(m, "RemoteEndpoint")
        .def(py::init([](std::string url, int timeout_ms, int max_retries) {
                 return RemoteEndpoint{std::move(url), timeout_ms, max_retries};
             }),
             py::arg("base_url"), py::arg("timeout_ms") = 10000, py::arg("max_retries") = 3);
    py::class_<RemoteDetector, Detector>(m, "RemoteDetector").def(py::init<RemoteEndpoint>());

    m.def("detect_corpus", &detect_corpus, py::arg("corpus"), py::arg("detector"),
          py::arg("max_len") = 512);

    py::class_<SurrogateGenerator>(m, "SurrogateGenerator")
        .def(py::init<std::map<std::string, std::vector<std::string>>>(), py::arg("lexicons"))
        .def_static("from_lexicon_file", &SurrogateGenerator::from_lexicon_file, py::arg("path"));

    py::class_<DeidResult>(m, "DeidResult")
        .def_readonly("text", &DeidResult::text)
        .def_readonly("spans", &DeidResult::spans)
        .def_readonly("seed", &DeidResult::seed)
        .def_readonly("warnings", &DeidResult::warnings);

    m.def(
        "apply_surrogates",
        [](const AnnotatedReport& report, const std::vector<PhiSpan>& spans, std::uint64_t seed,
           const SurrogateGenerator& gen) { return apply_surrogates(report, spans, seed, gen); },
        py::arg("report"), py::arg("spans"), py::arg("seed"), py::arg("generator"));

    m.def("deidentify_corpus", &deidentify_corpus, py::arg("corpus"), py::arg("detector"),
          py::arg("seed"), py::arg("runs"), py::arg("generator"), py::arg("max_len") = 512);

    m.def(
        "evaluate_corpus",
        [](const Corpus& gold, const Corpus& pred, Provenance gp, Provenance pp) {
            return eval_report_dict(evaluate_corpus(gold, pred, gp, pp));
        },
        py::arg("gold"), py::arg("pred"), py::arg("gold_provenance"),
        py::arg("pred_provenance"));

    py::class_<VendorSpan>(m, "VendorSpan")
        .def_readonly("start", &VendorSpan::start)
        .def_readonly("end", &VendorSpan::end)
        .def_readonly("label", &VendorSpan::label)
        .def_readonly("confidence", &VendorSpan::confidence);

    py::class_<VendorMapping>(m, "VendorMapping")
        .def_readonly("vendor", &VendorMapping::vendor)
        .def_readonly("labels", &VendorMapping::labels);

    m.def("builtin_mappings", &builtin_mappings);
    m.def("parse_gcp_response", &parse_gcp_response, py::arg("body"), py::arg("text"));
    m.def("parse_aws_response", &parse_aws_response, py::arg("body"), py::arg("text"));
    m.def("parse_azure_response", &parse_azure_response, py::arg("body"), py::arg("text"));
    m.def(
        "evaluate_vendor",
        [](const Corpus& deid_corpus,
           const std::map<std::string, std::vector<VendorSpan>>& spans_by_report,
           const VendorMapping& mapping) {
            return eval_report_dict(evaluate_vendor(deid_corpus, spans_by_report, mapping));
        },
        py::arg("deid_corpus"), py::arg("spans_by_report"), py::arg("mapping"));
}
