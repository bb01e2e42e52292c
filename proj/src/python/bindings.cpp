#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "newsclick/cli.hpp"
#include "newsclick/config.hpp"
#include "newsclick/error.hpp"
#include "newsclick/io.hpp"
#include "newsclick/pipeline.hpp"
#include "newsclick/synth.hpp"

namespace py = pybind11;
using namespace newsclick;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& X) {
  if (X.ndim() != 2) throw ContractViolation("X must be two-dimensional");
  const auto rows = static_cast<std::size_t>(X.shape(0));
  const auto cols = static_cast<std::size_t>(X.shape(1));
  return Matrix(rows, cols, std::vector<double>(X.data(), X.data() + rows * cols));
}

std::vector<double> to_vector(const Array& y) {
  if (y.ndim() != 1) throw ContractViolation("y must be one-dimensional");
  return {y.data(), y.data() + y.shape(0)};
}

Array to_array(const std::vector<double>& v) {
  Array a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["n"] = r.n;
  d["mae"] = r.mae;
  d["mre"] = r.mre;
  d["cae"] = r.cae;
  d["cre"] = r.cre;
  d["ae"] = to_array(r.ae);
  d["re"] = to_array(r.re);
  return d;
}

struct Model {
  ModelPtr ptr;

  Array predict(const Array& X) const { return to_array(ptr->predict_rows(to_matrix(X))); }
  std::string save() const {
    std::ostringstream s;
    save_model(*ptr, s);
    return s.str();
  }
  static Model load(const std::string& text) {
    std::istringstream s(text);
    return {load_model(s)};
  }
};

Model fit(const LearnerSpec& spec, const Array& X, const Array& y, std::uint64_t seed) {
  spec.validate();
  const auto M = to_matrix(X);
  const auto v = to_vector(y);
  py::gil_scoped_release release;
  return {fit_learner(spec, M, v, seed)};
}

LearnerSpec spec_from_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in).learner;
}

struct Loaded {
  PipelineConfig cfg;
  Dataset data;
  PipelineInputs inputs;
};

Loaded load(const std::string& config, const std::string& data, std::optional<int> folds = {},
            std::optional<std::uint64_t> seed = {}) {
  Loaded l;
  l.cfg = load_config(config);
  if (folds) l.cfg.cv_folds = *folds;
  if (seed) l.cfg.seed = *seed;
  l.cfg.validate();
  l.data = read_dataset(data);
  l.inputs = load_inputs(l.cfg, l.data);
  return l;
}

struct Pipeline {
  TrainedPipeline p;

  static Pipeline train(const std::string& config, const std::string& data) {
    auto l = load(config, data);
    py::gil_scoped_release release;
    return {train_pipeline(l.data, l.inputs, l.cfg)};
  }
  Array predict(const std::string& config, const std::string& data) const {
    const auto l = load(config, data);
    return to_array(predict_pipeline(p, l.data.entries(), l.inputs));
  }
  void save(const std::string& path) const {
    write_file_atomic(path, [&](std::ostream& f) { save_pipeline(p, f); });
  }
  static Pipeline load_file(const std::string& path) {
    auto in = open_input(path);
    return {load_pipeline(in)};
  }
};

}  // namespace

PYBIND11_MODULE(_newsclick, m) {
  m.doc() = "Hourly news click prediction: features, tree learners, ensembles and evaluation.";

  static py::exception<Error> error(m, "Error");
  static py::exception<ParseError> parse_error(m, "ParseError", error.ptr());
  static py::exception<ValidationError> validation_error(m, "ValidationError", error.ptr());
  static py::exception<ContractViolation> contract_violation(m, "ContractViolation", error.ptr());
  static py::exception<IoError> io_error(m, "IoError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      PyErr_SetString(parse_error.ptr(), e.what());
    } catch (const ValidationError& e) {
      PyErr_SetString(validation_error.ptr(), e.what());
    } catch (const ContractViolation& e) {
      PyErr_SetString(contract_violation.ptr(), e.what());
    } catch (const IoError& e) {
      PyErr_SetString(io_error.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_command(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one CLI subcommand; returns (exit_code, stdout, stderr).");

  m.def(
      "synth",
      [](const std::string& out, std::uint64_t seed, std::optional<int> links, std::optional<int> days) {
        SynthParams p;
        p.seed = seed;
        if (links) p.n_links = *links;
        if (days) p.days = *days;
        const auto s = synth_generate(p);
        write_synth(s, SynthFiles::beside(out));
        return s.dataset.size();
      },
      py::arg("out"), py::arg("seed") = 42, py::arg("links") = py::none(), py::arg("days") = py::none(),
      "Writes a synthetic dataset and its sidecars; returns the entry count.");

  m.def(
      "read_clicks",
      [](const std::string& path) {
        const auto d = read_dataset(path);
        std::vector<double> c;
        c.reserve(d.size());
        for (const auto& e : d.entries()) c.push_back(static_cast<double>(e.clicks));
        return to_array(c);
      },
      py::arg("path"));
  m.def(
      "normalize_dataset",
      [](const std::string& text) {
        std::istringstream in(text);
        std::ostringstream out;
        write_dataset(parse_dataset(in), out);
        return out.str();
      },
      py::arg("text"), "Parses bracketed dataset text and writes it back canonically.");

  m.def(
      "compute_metrics",
      [](const Array& p, const Array& t) {
        const auto pv = to_vector(p), tv = to_vector(t);
        return report_dict(compute_metrics(pv, tv));
      },
      py::arg("predictions"), py::arg("truths"));
  m.def(
      "forward_target", [](double y, const std::string& s) { return forward_target(y, parse_target_scale(s)); },
      py::arg("y"), py::arg("scale") = "log10");
  m.def(
      "inverse_target",
      [](double p, const std::string& s) { return inverse_target(p, parse_target_scale(s)).value; }, py::arg("p"),
      py::arg("scale") = "log10");
  m.def(
      "clip_outliers",
      [](double p, const std::string& kind, double train_max) {
        return clip_outliers(p, {parse_outlier_kind(kind), train_max});
      },
      py::arg("prediction"), py::arg("policy"), py::arg("train_max_clicks"));
  m.def("kfold_split", &kfold_split, py::arg("n"), py::arg("k"), py::arg("seed"));

  py::class_<Model>(m, "Model")
      .def("predict", &Model::predict, py::arg("X"))
      .def_property_readonly("width", [](const Model& s) { return s.ptr->width(); })
      .def("save", &Model::save, "Versioned text form; load(save()) predicts bit-identically.")
      .def_static("load", &Model::load, py::arg("text"));

  m.def(
      "fit_linear", [](const Array& X, const Array& y, double ridge) {
        return fit(LearnerSpec::linear(LinearParams{ridge}), X, y, 0);
      },
      py::arg("X"), py::arg("y"), py::arg("ridge") = kDefaultRidgeEpsilon);
  m.def(
      "fit_m5p", [](const Array& X, const Array& y) { return fit(LearnerSpec::m5p(), X, y, 0); }, py::arg("X"),
      py::arg("y"));
  m.def(
      "fit_reptree", [](const Array& X, const Array& y, std::uint64_t seed) { return fit(LearnerSpec::reptree(), X, y, seed); },
      py::arg("X"), py::arg("y"), py::arg("seed") = 1);
  m.def(
      "fit_default", [](const Array& X, const Array& y, std::uint64_t seed) { return fit(default_learner(), X, y, seed); },
      py::arg("X"), py::arg("y"), py::arg("seed") = 1, "Additive regression over bagged M5P.");
  m.def(
      "fit_config",
      [](const std::string& config_text, const Array& X, const Array& y, std::uint64_t seed) {
        return fit(spec_from_config_text(config_text), X, y, seed);
      },
      py::arg("config_text"), py::arg("X"), py::arg("y"), py::arg("seed") = 1,
      "Fits the learner block of a configuration text.");

  py::class_<Pipeline>(m, "Pipeline")
      .def_static("train", &Pipeline::train, py::arg("config"), py::arg("data"))
      .def_static("load", &Pipeline::load_file, py::arg("path"))
      .def("predict", &Pipeline::predict, py::arg("config"), py::arg("data"))
      .def("save", &Pipeline::save, py::arg("path"))
      .def_property_readonly("learner", [](const Pipeline& s) { return s.p.learner; })
      .def_property_readonly("columns", [](const Pipeline& s) { return s.p.schema.expanded_width(); });

  m.def(
      "cross_validate",
      [](const std::string& config, const std::string& data, std::optional<int> folds,
         std::optional<std::uint64_t> seed) {
        auto l = load(config, data, folds, seed);
        EvalReport r;
        {
          py::gil_scoped_release release;
          r = cross_validate(l.data, l.inputs, l.cfg);
        }
        return report_dict(r);
      },
      py::arg("config"), py::arg("data"), py::arg("folds") = py::none(), py::arg("seed") = py::none());
  m.def(
      "ablate",
      [](const std::string& config, const std::string& data) {
        auto l = load(config, data);
        std::vector<AblationRow> rows;
        {
          py::gil_scoped_release release;
          rows = ablate(l.data, l.inputs, l.cfg);
        }
        py::list out;
        for (const auto& r : rows) {
          auto d = report_dict(r.report);
          d["name"] = r.name;
          out.append(d);
        }
        return out;
      },
      py::arg("config"), py::arg("data"));
}
