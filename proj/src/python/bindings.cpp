// Copyright 2026 The mcdec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/gil_safe_call_once.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mcdec/cli.hpp"
#include "mcdec/conflict.hpp"
#include "mcdec/context_selection.hpp"
#include "mcdec/decoding.hpp"
#include "mcdec/error.hpp"
#include "mcdec/evaluation.hpp"
#include "mcdec/ngram_backend.hpp"
#include "mcdec/prompting.hpp"
#include "mcdec/retrieval.hpp"
#include "mcdec/scripted_backend.hpp"

namespace py = pybind11;
using namespace mcdec;

namespace {

py::dict passage_dict(const Passage& p) {
  py::dict d;
  d["id"] = p.id;
  d["title"] = p.title;
  d["text"] = p.text;
  return d;
}

Passage passage_from(const py::handle& h) {
  if (py::isinstance<py::dict>(h)) {
    const auto d = h.cast<py::dict>();
    return {d["id"].cast<std::string>(), d.contains("title") ? d["title"].cast<std::string>() : "",
            d["text"].cast<std::string>()};
  }
  const auto t = h.cast<std::tuple<std::string, std::string, std::string>>();
  return {std::get<0>(t), std::get<1>(t), std::get<2>(t)};
}

py::dict decode_result_dict(const DecodeResult& r) {
  py::list traces;
  for (const auto& t : r.traces) {
    py::dict d;
    d["step"] = t.step_index;
    d["alpha"] = t.alpha_used;
    d["C"] = t.confidence_parametric;
    d["C_R"] = t.confidence_relevant;
    d["chosen"] = t.chosen_token;
    d["top5"] = t.top5_combined;
    traces.append(d);
  }
  py::dict d;
  d["text"] = r.text;
  d["tokens"] = r.tokens;
  d["stop_reason"] = std::string(stop_reason_name(r.stop_reason));
  d["traces"] = traces;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-input contrastive decoding core";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&] { return py::object(py::reinterpret_borrow<py::object>(PyErr_NewException("mcdec._core.McdecError", PyExc_RuntimeError, nullptr))); });
  m.attr("McdecError") = error_type.get_stored();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const auto args = py::make_tuple(std::string(error_code_name(e.code())), std::string(e.what()));
      PyErr_SetObject(error_type.get_stored().ptr(), args.ptr());
    }
  });

  m.def("softmax", [](const std::vector<double>& z) { return softmax(z); }, py::arg("logits"));
  m.def("combine_contrastive",
        [](const std::vector<double>& z, const std::vector<double>& zp, const std::vector<double>& zm, double alpha) {
          return combine_contrastive(z, zp, zm, alpha);
        },
        py::arg("z"), py::arg("z_plus"), py::arg("z_minus"), py::arg("alpha"));
  m.def("combine_cad",
        [](const std::vector<double>& z, const std::vector<double>& zp, double alpha) {
          return combine_cad(z, zp, alpha);
        },
        py::arg("z"), py::arg("z_plus"), py::arg("alpha"));
  m.def("ratio_form_probability",
        [](const std::vector<double>& z, const std::vector<double>& zp, const std::vector<double>& zm, double alpha) {
          return ratio_form_probability(z, zp, zm, alpha);
        },
        py::arg("z"), py::arg("z_plus"), py::arg("z_minus"), py::arg("alpha"));
  m.def("dynamic_alpha",
        [](const std::vector<double>& p, const std::vector<double>& pr) { return dynamic_alpha(p, pr); },
        py::arg("p_parametric"), py::arg("p_relevant"));
  m.def("argmax", [](const std::vector<double>& v) { return argmax(v); }, py::arg("values"));

  py::class_<DecodeStrategy>(m, "DecodeStrategy")
      .def(py::init([](const std::string& name, std::optional<double> alpha) { return parse_strategy(name, alpha); }),
           py::arg("name"), py::arg("alpha") = py::none())
      .def_property_readonly("name", [](const DecodeStrategy& s) { return std::string(strategy_name(s.kind)); })
      .def_readonly("alpha", &DecodeStrategy::alpha)
      .def_property_readonly("alpha_mode", &DecodeStrategy::alpha_mode)
      .def("__repr__", [](const DecodeStrategy& s) {
        return "DecodeStrategy('" + std::string(strategy_name(s.kind)) + "', alpha=" + std::to_string(s.alpha) + ")";
      });

  py::class_<LanguageModel>(m, "LanguageModel")
      .def("tokenize", &LanguageModel::tokenize, py::arg("text"))
      .def("detokenize", [](const LanguageModel& lm, const TokenSequence& ids) { return lm.detokenize(ids); },
           py::arg("ids"))
      .def("next_logits", [](const LanguageModel& lm, const TokenSequence& ids) { return lm.next_logits(ids); },
           py::arg("prefix"))
      .def_property_readonly("vocab_size", [](const LanguageModel& lm) { return lm.vocab().size; })
      .def_property_readonly("eos_id", [](const LanguageModel& lm) { return lm.vocab().eos_id; })
      .def_property_readonly("identity", [](const LanguageModel& lm) { return lm.descriptor().identity; });

  py::class_<ScriptedBackend, LanguageModel>(m, "ScriptedBackend")
      .def_static("from_json", [](const std::string& text) {
        return ScriptedBackend(ScriptedDefinition::from_json(nlohmann::json::parse(text)));
      }, py::arg("text"))
      .def_static("from_file", &ScriptedBackend::from_file, py::arg("path"))
      .def_static("printable_ascii", [] { return ScriptedBackend(ScriptedDefinition::printable_ascii()); });

  py::class_<NgramBackend, LanguageModel>(m, "NgramBackend")
      .def_static("train",
                  [](const std::vector<std::string>& docs, int order, const std::string& unit, double beta) {
                    return NgramBackend::train(docs, NgramConfig{order, parse_token_unit(unit), beta});
                  },
                  py::arg("documents"), py::arg("order") = 3, py::arg("unit") = "word",
                  py::arg("prompt_cache_weight") = 0.0)
      .def_static("from_config_file", &NgramBackend::from_config_file, py::arg("path"));

  m.def("decode",
        [](const DecodeStrategy& strategy, const LanguageModel& model, std::optional<TokenSequence> parametric,
           std::optional<TokenSequence> relevant, std::optional<TokenSequence> irrelevant, std::size_t max_new_tokens,
           std::vector<std::string> stop) {
          DecodeLimits limits;
          limits.max_new_tokens = max_new_tokens;
          limits.stop_strings = std::move(stop);
          DecodeResult r;
          {
            py::gil_scoped_release release;
            r = decode(strategy, BranchPrompts{parametric, relevant, irrelevant}, model, limits);
          }
          return decode_result_dict(r);
        },
        py::arg("strategy"), py::arg("model"), py::arg("parametric") = py::none(), py::arg("relevant") = py::none(),
        py::arg("irrelevant") = py::none(), py::arg("max_new_tokens") = DecodeLimits::kDefaultMaxNewTokens,
        py::arg("stop") = std::vector<std::string>{"\n"});

  m.def("analyze", &analyze, py::arg("text"));
  py::class_<Bm25Index, std::shared_ptr<Bm25Index>>(m, "Bm25Index")
      .def_static("build",
                  [](const py::iterable& passages, double k1, double b) {
                    std::vector<Passage> corpus;
                    for (const auto& p : passages) corpus.push_back(passage_from(p));
                    return std::make_shared<Bm25Index>(Bm25Index::build(std::move(corpus), {k1, b}));
                  },
                  py::arg("passages"), py::arg("k1") = 1.2, py::arg("b") = 0.75)
      .def_static("load", [](const std::filesystem::path& dir) { return std::make_shared<Bm25Index>(Bm25Index::load(dir)); },
                  py::arg("dir"))
      .def("save", &Bm25Index::save, py::arg("dir"))
      .def("search",
           [](const Bm25Index& index, const std::string& query, std::size_t k) {
             py::list out;
             for (const auto& hit : index.search(query, k)) {
               auto d = passage_dict(hit.passage);
               d["score"] = hit.score;
               d["rank"] = hit.rank;
               out.append(d);
             }
             return out;
           },
           py::arg("query"), py::arg("k") = 10)
      .def("__len__", &Bm25Index::num_docs)
      .def_property_readonly("avgdl", &Bm25Index::avgdl);

  m.def("select_irrelevant",
        [](const std::string& strategy, const py::handle& c_plus, const py::iterable& pool,
           std::shared_ptr<Bm25Index> embedder_index, std::uint64_t seed) {
          std::vector<Passage> candidates;
          for (const auto& p : pool) candidates.push_back(passage_from(p));
          std::unique_ptr<TfidfEmbedder> embedder;
          if (embedder_index) embedder = std::make_unique<TfidfEmbedder>(embedder_index);
          return passage_dict(select_irrelevant(parse_irrelevant_strategy(strategy), passage_from(c_plus),
                                                candidates, embedder.get(), seed));
        },
        py::arg("strategy"), py::arg("c_plus"), py::arg("pool"), py::arg("embedder_index") = nullptr,
        py::arg("seed") = 0);
  m.def("fixed_irrelevant_text", [] { return std::string(fixed_irrelevant_text()); });

  m.def("render_prompt",
        [](const std::string& mode, const std::string& question, std::optional<std::string> context) {
          return render_prompt(mode == "open" ? PromptMode::kOpen : PromptMode::kClosed, question, context, {});
        },
        py::arg("mode"), py::arg("question"), py::arg("context") = py::none());

  m.def("normalize_answer", &normalize_answer, py::arg("text"));
  m.def("exact_match", &exact_match, py::arg("prediction"), py::arg("answers"));
  m.def("popularity_bucket", &popularity_bucket, py::arg("views"));

  m.def("generate_conflict_set_json",
        [](const std::string& records_jsonl, std::optional<std::vector<std::string>> pool, std::uint64_t seed) {
          std::vector<QaRecord> records;
          std::istringstream in(records_jsonl);
          for (std::string line; std::getline(in, line);) {
            if (!line.empty()) records.push_back(qa_record_from_json(nlohmann::json::parse(line)));
          }
          const auto set = generate_conflict_set(records, pool ? *pool : self_entity_pool(records), seed);
          std::string out;
          for (const auto& r : set.records) out += substitution_to_json(r).dump() + "\n";
          return out;
        },
        py::arg("records_jsonl"), py::arg("pool") = py::none(), py::arg("seed") = 0);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::vector<const char*> argv{"mcdec"};
          for (const auto& a : args) argv.push_back(a.c_str());
          std::ostringstream out, err;
          int code;
          {
            py::gil_scoped_release release;
            code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
