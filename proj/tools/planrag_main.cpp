// Command-line front end: offline/remote inference over a query file,
// dataset construction from source QA data, trace evaluation, and dataset
// statistics.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "planrag/config.hpp"
#include "planrag/dataset_builder.hpp"
#include "planrag/metrics.hpp"
#include "planrag/mock_backend.hpp"
#include "planrag/orchestrator.hpp"
#include "planrag/retrieval.hpp"
#include "planrag/trace_io.hpp"
#include "planrag/wire_clients.hpp"

namespace {

using namespace planrag;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitBackend = 4;
constexpr int kExitMismatch = 5;

cli::WireOptions wire_options(const cli::EngineConfig& config) {
    cli::WireOptions options;
    options.timeout_ms = config.backends.timeout_ms;
    options.retries = config.backends.retries;
    options.backoff_base_ms = config.backends.backoff_base_ms;
    return options;
}

int cmd_infer(const std::string& queries_path, const std::string& corpus_path,
              const std::string& config_path, const std::string& out_path) {
    cli::EngineConfig config;
    try {
        config = cli::load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }

    try {
        const std::vector<orchestrator::Query> queries =
            cli::parse_queries(cli::read_jsonl(queries_path));

        std::unique_ptr<retrieval::LexicalIndex> index;
        if (config.run.evidence_mode != retrieval::EvidenceMode::Disabled) {
            if (corpus_path.empty() || !std::filesystem::exists(corpus_path)) {
                std::cerr << "i/o error: corpus file required for retrieval: '"
                          << corpus_path << "'\n";
                return kExitIo;
            }
            const std::vector<retrieval::Document> corpus =
                cli::parse_corpus(cli::read_jsonl(corpus_path));
            try {
                index = std::make_unique<retrieval::LexicalIndex>(
                    retrieval::LexicalIndex::build(corpus));
            } catch (const Error& e) {
                std::cerr << "i/o error: corpus unusable: " << e.what() << "\n";
                return kExitIo;
            }
        }

        std::unique_ptr<orchestrator::LmBackend> backend;
        if (config.backends.mock_script) {
            backend = cli::ScriptLibraryBackend::from_file(
                *config.backends.mock_script);
        } else {
            cli::PromptTemplate prompt_template =
                config.prompt_template.empty()
                    ? cli::PromptTemplate::builtin()
                    : cli::PromptTemplate::from_file(config.prompt_template);
            backend = std::make_unique<cli::HttpLmBackend>(
                *config.backends.lm_url, wire_options(config),
                std::move(prompt_template));
        }

        std::unique_ptr<retrieval::SentenceScorer> scorer;
        if (config.run.evidence_mode == retrieval::EvidenceMode::Selected) {
            if (config.backends.reranker_url) {
                scorer = std::make_unique<cli::HttpRerankerScorer>(
                    *config.backends.reranker_url, wire_options(config));
            } else {
                scorer = std::make_unique<retrieval::LexicalOverlapScorer>();
            }
        }

        std::vector<double> timings;
        const std::vector<grammar::GenerationTrace> traces = orchestrator::run_batch(
            queries, *backend, index.get(), scorer.get(), config.run,
            config.in_flight, config.emit_timings ? &timings : nullptr);

        std::vector<std::string> lines;
        bool any_failure = false;
        for (size_t i = 0; i < traces.size(); ++i) {
            cli::TraceEnvelope envelope;
            envelope.id = queries[i].id;
            envelope.question = queries[i].question;
            envelope.trace = traces[i];
            if (config.emit_timings) envelope.timing_ms = timings[i];
            if (traces[i].error) any_failure = true;
            lines.push_back(cli::trace_to_json(envelope).dump());
        }
        cli::write_lines(out_path, lines);
        return any_failure ? kExitPartial : kExitOk;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const BackendUnavailable& e) {
        std::cerr << "backend unavailable: " << e.what() << "\n";
        return kExitBackend;
    }
}

dataset::SourceExample parse_source_example(const nlohmann::json& doc,
                                            dataset::DatasetKind default_kind) {
    dataset::SourceExample example;
    example.kind = doc.contains("kind")
                       ? dataset::dataset_kind_from_name(
                             doc.at("kind").get<std::string>())
                       : default_kind;
    example.id = doc.value("id", std::string());
    example.question = doc.at("question").get<std::string>();
    example.answer_segments =
        doc.at("answer_segments").get<std::vector<std::string>>();
    if (doc.contains("documents")) {
        for (const auto& d : doc.at("documents")) {
            retrieval::Document parsed;
            parsed.doc_id = d.at("doc_id").get<std::string>();
            if (d.contains("title") && !d.at("title").is_null()) {
                parsed.title = d.at("title").get<std::string>();
            }
            parsed.body = d.at("body").get<std::string>();
            example.documents.push_back(std::move(parsed));
        }
    }
    if (doc.contains("qa_subpairs")) {
        for (const auto& pair : doc.at("qa_subpairs")) {
            example.qa_subpairs.push_back(
                dataset::QaSubPair{pair.at("question").get<std::string>(),
                                   pair.at("answer").get<std::string>()});
        }
    }
    example.needs_retrieval = doc.value("needs_retrieval", true);
    return example;
}

int cmd_build_dataset(const std::string& source_path, const std::string& kind_name,
                      const std::string& client_spec, const std::string& out_path,
                      int timeout_ms, int retries) {
    dataset::DatasetKind kind;
    try {
        kind = dataset::dataset_kind_from_name(kind_name);
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const std::vector<nlohmann::json> lines = cli::read_jsonl(source_path);

        std::unique_ptr<dataset::AnnotationClient> client;
        if (client_spec.starts_with("http://") ||
            client_spec.starts_with("https://")) {
            cli::WireOptions options;
            options.timeout_ms = timeout_ms;
            options.retries = retries;
            client = std::make_unique<cli::HttpAnnotationClient>(client_spec,
                                                                 options);
        } else {
            client = std::make_unique<dataset::ScriptedAnnotationClient>(
                dataset::ScriptedAnnotationClient::from_file(client_spec));
        }

        std::vector<std::string> records;
        std::vector<std::string> rejects;
        for (const nlohmann::json& doc : lines) {
            dataset::SourceExample example;
            try {
                example = parse_source_example(doc, kind);
            } catch (const nlohmann::json::exception& e) {
                throw IoError(std::string("malformed source record: ") + e.what());
            }
            const dataset::BuildOutcome outcome =
                dataset::build_record(example, *client);
            if (!outcome.record) {
                nlohmann::ordered_json reject;
                reject["id"] = example.id;
                reject["reason"] = outcome.reject_reason;
                rejects.push_back(reject.dump());
                continue;
            }
            nlohmann::ordered_json record;
            record["input"] = outcome.record->input_text;
            record["target"] = outcome.record->target_text;
            nlohmann::ordered_json plan_spans = nlohmann::ordered_json::array();
            for (const auto& [b, e] : outcome.record->plan_mask_spans) {
                plan_spans.push_back({b, e});
            }
            nlohmann::ordered_json answer_spans = nlohmann::ordered_json::array();
            for (const auto& [b, e] : outcome.record->answer_mask_spans) {
                answer_spans.push_back({b, e});
            }
            record["plan_spans"] = std::move(plan_spans);
            record["answer_spans"] = std::move(answer_spans);
            nlohmann::ordered_json meta;
            meta["id"] = example.id;
            meta["kind"] = std::string(dataset::dataset_kind_name(example.kind));
            meta["num_plans"] = outcome.record->plan_mask_spans.size();
            record["meta"] = std::move(meta);
            records.push_back(record.dump());
        }
        cli::write_lines(out_path, records);
        if (!rejects.empty()) {
            cli::write_lines(out_path + ".rejects", rejects);
            std::cerr << rejects.size() << " example(s) rejected; see "
                      << out_path << ".rejects\n";
        }
        return kExitOk;
    } catch (const BackendUnavailable& e) {
        std::cerr << "backend unavailable: " << e.what() << "\n";
        return kExitBackend;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
}

int cmd_eval(const std::string& traces_path, const std::string& golds_path,
             const std::string& task_name, const std::string& out_path,
             const std::vector<std::string>& metric_overrides) {
    orchestrator::TaskKind task;
    try {
        task = orchestrator::task_kind_from_name(task_name);
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    for (const std::string& metric : metric_overrides) {
        if (!metrics::metric_supported(metric)) {
            std::cerr << "config error: metric '" << metric
                      << "' is not computable locally\n";
            return kExitConfig;
        }
    }

    try {
        std::vector<cli::TraceEnvelope> envelopes;
        for (const nlohmann::json& doc : cli::read_jsonl(traces_path)) {
            envelopes.push_back(cli::trace_from_json(doc));
        }
        const std::vector<cli::GoldEntry> golds =
            cli::parse_golds(cli::read_jsonl(golds_path));

        if (envelopes.size() != golds.size()) {
            std::cerr << "id mismatch: " << envelopes.size() << " traces vs "
                      << golds.size() << " golds\n";
            return kExitMismatch;
        }
        std::map<std::string, std::vector<std::string>> golds_by_id;
        for (const cli::GoldEntry& entry : golds) {
            golds_by_id[entry.id] = entry.golds;
        }
        std::vector<metrics::EvalInput> items;
        for (const cli::TraceEnvelope& envelope : envelopes) {
            auto it = golds_by_id.find(envelope.id);
            if (it == golds_by_id.end()) {
                std::cerr << "id mismatch: no golds for trace id '"
                          << envelope.id << "'\n";
                return kExitMismatch;
            }
            items.push_back(metrics::EvalInput{envelope.id,
                                               envelope.trace.final_answer(),
                                               it->second});
        }

        const metrics::EvalReport report = metrics::evaluate_run(items, task);
        std::cout << report.to_table();
        const std::string report_json = report.to_json().dump(2);
        if (out_path.empty()) {
            std::cout << report_json << "\n";
        } else {
            cli::write_lines(out_path, {report_json});
        }
        return kExitOk;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
}

int cmd_stats(const std::string& data_path) {
    try {
        const std::vector<nlohmann::json> lines = cli::read_jsonl(data_path);
        size_t total_plans = 0;
        size_t with_plan = 0;
        for (const nlohmann::json& doc : lines) {
            const size_t plans =
                doc.contains("plan_spans") ? doc.at("plan_spans").size() : 0;
            total_plans += plans;
            if (plans > 0) ++with_plan;
        }
        nlohmann::ordered_json out;
        out["records"] = lines.size();
        if (lines.empty()) {
            out["avg_plans_per_record"] = nullptr;
            out["pct_with_plan"] = nullptr;
        } else {
            out["avg_plans_per_record"] =
                static_cast<double>(total_plans) / static_cast<double>(lines.size());
            out["pct_with_plan"] = 100.0 * static_cast<double>(with_plan) /
                                   static_cast<double>(lines.size());
        }
        std::cout << out.dump(2) << "\n";
        return kExitOk;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"plan-guided retrieval generation engine"};
    app.require_subcommand(1);

    std::string queries_path, corpus_path, config_path, out_path;
    CLI::App* infer = app.add_subcommand(
        "infer", "run the plan/answer loop over a query file");
    infer->add_option("--queries", queries_path, "queries JSONL")->required();
    infer->add_option("--corpus", corpus_path, "corpus JSONL");
    infer->add_option("--config", config_path, "engine config JSON")->required();
    infer->add_option("--out", out_path, "trace output JSONL")->required();

    std::string source_path, kind_name, client_spec, dataset_out;
    int build_timeout_ms = 10000;
    int build_retries = 2;
    CLI::App* build = app.add_subcommand(
        "build-dataset", "construct supervision records from source QA data");
    build->add_option("--source", source_path, "source JSONL")->required();
    build->add_option("--kind", kind_name,
                      "default dataset kind: short_form|asqa|sharegpt|hotpotqa")
        ->required();
    build->add_option("--client", client_spec,
                      "annotation client: script file path or http(s) URL")
        ->required();
    build->add_option("--out", dataset_out, "output JSONL")->required();
    build->add_option("--timeout-ms", build_timeout_ms, "HTTP timeout");
    build->add_option("--retries", build_retries, "HTTP retries");

    std::string traces_path, golds_path, task_name, report_out;
    std::vector<std::string> metric_overrides;
    CLI::App* eval = app.add_subcommand("eval", "score traces against golds");
    eval->add_option("--traces", traces_path, "trace JSONL from infer")->required();
    eval->add_option("--golds", golds_path, "gold JSONL")->required();
    eval->add_option("--task", task_name, "short|long|multihop")->required();
    eval->add_option("--out", report_out, "report JSON path (default stdout)");
    eval->add_option("--metric", metric_overrides, "extra metric names to check");

    std::string stats_path;
    CLI::App* stats = app.add_subcommand("stats", "dataset statistics");
    stats->add_option("--data", stats_path, "built dataset JSONL")->required();

    CLI11_PARSE(app, argc, argv);

    if (infer->parsed()) {
        return cmd_infer(queries_path, corpus_path, config_path, out_path);
    }
    if (build->parsed()) {
        return cmd_build_dataset(source_path, kind_name, client_spec, dataset_out,
                                 build_timeout_ms, build_retries);
    }
    if (eval->parsed()) {
        return cmd_eval(traces_path, golds_path, task_name, report_out,
                        metric_overrides);
    }
    if (stats->parsed()) {
        return cmd_stats(stats_path);
    }
    return kExitConfig;
}
