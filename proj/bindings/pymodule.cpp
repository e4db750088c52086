#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smsguard/mpa.hpp"
#include "smsguard/pipeline.hpp"
#include "smsguard/util.hpp"

namespace py = pybind11;
using namespace smsguard;

namespace {

// Owns the loaded resources and exposes the featurization entry points most
// useful from notebooks and glue scripts.
class Engine {
 public:
  explicit Engine(const std::string& data_dir) : ctx_(pipeline::Context::load(data_dir)) {
    featurizer_.res = &ctx_.resources;
    featurizer_.lexicon = &ctx_.lexicon;
    featurizer_.matcher = &ctx_.matcher;
    featurizer_.keywords = &ctx_.keywords;
  }

  std::string normalize(const std::string& text) const {
    return textnorm::normalize(text, ctx_.lexicon).normalized;
  }

  std::vector<float> features(const std::string& text) const {
    Message m;
    m.id = "py";
    m.text = text;
    auto r = featurizer_.featurize(m);
    return {r.vector.values.begin(), r.vector.values.end()};
  }

  std::vector<py::dict> entities(const std::string& text) const {
    static const char* kind_names[] = {"url", "phone", "email", "timex", "number", "currency"};
    auto set = entity::extract_entities(text, ctx_.resources);
    std::vector<py::dict> out;
    for (const auto& e : set.entities) {
      py::dict d;
      d["kind"] = kind_names[static_cast<int>(e.kind)];
      d["raw"] = e.raw;
      d["canonical"] = e.canonical;
      d["start"] = e.start;
      d["end"] = e.end;
      out.push_back(std::move(d));
    }
    return out;
  }

  std::vector<int> cluster_counts(const std::string& text) const {
    return ctx_.matcher.count(text);
  }

 private:
  pipeline::Context ctx_;
  mela::Featurizer featurizer_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "short-text spam detection core";

  py::register_exception<SchemaError>(m, "SchemaError");
  py::register_exception<DataError>(m, "DataError");

  m.def("mela_schema", [] { return mela::message_schema(); },
        "MELA message feature names in vector order");
  m.def("mpa_schema", [] { return mpa::schema(); },
        "messaging-pattern feature names in vector order");
  m.def("recipient_entropy", &mpa::recipient_entropy,
        "mean per-position digit entropy over unique recipients");

  py::class_<Engine>(m, "Engine")
      .def(py::init<const std::string&>(), py::arg("data_dir"))
      .def("normalize", &Engine::normalize, py::arg("text"))
      .def("features", &Engine::features, py::arg("text"))
      .def("entities", &Engine::entities, py::arg("text"))
      .def("cluster_counts", &Engine::cluster_counts, py::arg("text"));
}
