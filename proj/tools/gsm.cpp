#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gsm/engine.hpp"
#include "gsm/errors.hpp"
#include "gsm/extract.hpp"
#include "gsm/generate.hpp"
#include "gsm/ingest.hpp"
#include "gsm/scoring.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gsm::UnparseableInput("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw gsm::UnparseableInput("cannot write " + path);
}

struct SharedArgs {
    std::string input;
    std::string output;
    std::string dot;
    std::string format = "auto";
    std::uint64_t seed = 0;
    std::string events;
};

struct LearnArgs {
    SharedArgs shared;
    std::string algorithm = "rpni";
    std::string output_behavior;
    std::string transition_behavior;
    double epsilon = 0.05;
    double error_rate = 0.0;
    double threshold = 0.05;
    bool min_blue = false;
    bool depth_first = false;
    bool compat_on_pta = false;
    bool compat_on_futures = false;
    bool no_convert = false;
};

struct GenerateArgs {
    SharedArgs shared;
    std::uint64_t count = 0;
    std::uint32_t min_length = 1;
    std::uint32_t max_length = 1;
    double noise_rate = 0.0;
    std::uint32_t exhaustive = 0;
};

void add_shared(CLI::App* cmd, SharedArgs& args, bool input_required) {
    auto* in = cmd->add_option("--input", args.input, "Input file");
    if (input_required) in->required();
    cmd->add_option("--output", args.output, "Output file");
    cmd->add_option("--dot", args.dot, "DOT output file");
    cmd->add_option("--format", args.format, "Trace format")
        ->check(CLI::IsMember({"auto", "io-traces", "abbadingo", "observations"}));
    cmd->add_option("--seed", args.seed, "Random seed");
    cmd->add_option("--events", args.events, "Instrumentation event log (JSON lines)");
}

gsm::TraceKind kind_of(const std::string& format) {
    if (format == "io-traces") return gsm::TraceKind::io_traces;
    if (format == "abbadingo") return gsm::TraceKind::labeled_words;
    return gsm::TraceKind::observations;
}

gsm::BehaviorConfig resolve_behavior(const LearnArgs& args) {
    gsm::BehaviorConfig behavior;
    const std::string& alg = args.algorithm;
    bool stochastic_alg = alg == "alergia" || alg == "ioalergia" ||
                          alg == "ioalergia-partition" || alg == "ioalergia-edsm";

    if (args.output_behavior.empty())
        behavior.output_behavior = gsm::OutputBehavior::moore;
    else
        behavior.output_behavior = args.output_behavior == "moore" ? gsm::OutputBehavior::moore
                                                                   : gsm::OutputBehavior::mealy;

    if (args.transition_behavior.empty()) {
        if (stochastic_alg)
            behavior.transition_behavior = gsm::TransitionBehavior::stochastic;
        else if (alg == "noisy")
            behavior.transition_behavior = gsm::TransitionBehavior::nondeterministic;
        else
            behavior.transition_behavior = gsm::TransitionBehavior::deterministic;
    } else {
        behavior.transition_behavior =
            args.transition_behavior == "deterministic"
                ? gsm::TransitionBehavior::deterministic
                : (args.transition_behavior == "nondeterministic"
                       ? gsm::TransitionBehavior::nondeterministic
                       : gsm::TransitionBehavior::stochastic);
    }

    if ((alg == "rpni" || alg == "edsm") &&
        behavior.transition_behavior != gsm::TransitionBehavior::deterministic)
        throw gsm::InvalidConfig(alg + " needs deterministic transition behavior");
    if (stochastic_alg && behavior.transition_behavior != gsm::TransitionBehavior::stochastic)
        throw gsm::InvalidConfig(alg + " needs stochastic transition behavior");
    if (alg == "noisy" &&
        (behavior.output_behavior != gsm::OutputBehavior::moore ||
         behavior.transition_behavior != gsm::TransitionBehavior::nondeterministic))
        throw gsm::InvalidConfig("noisy needs moore outputs and nondeterministic transitions");
    return behavior;
}

gsm::EngineConfig make_config(const LearnArgs& args, const gsm::BehaviorConfig& behavior) {
    gsm::EngineConfig cfg;
    cfg.behavior = behavior;
    cfg.consider_only_min_blue = args.min_blue;
    cfg.depth_first = args.depth_first;
    const std::string& alg = args.algorithm;
    if (alg == "rpni") {
        cfg.strategy = gsm::rpni_strategy();
    } else if (alg == "edsm") {
        cfg.strategy = gsm::edsm_strategy();
    } else if (alg == "alergia" || alg == "ioalergia") {
        cfg.strategy = gsm::ioalergia_strategy({args.epsilon});
        cfg.eval_compat_on_pta = cfg.eval_compat_on_futures = true;
    } else if (alg == "ioalergia-partition") {
        cfg.strategy = gsm::ioalergia_partition_strategy({args.epsilon});
    } else if (alg == "ioalergia-edsm") {
        // Unlike plain ioalergia, the evidence variant checks compatibility
        // against the growing partition with live counts, so neither flag is
        // forced on.
        cfg.strategy = gsm::ioalergia_edsm_strategy({args.epsilon});
    } else {
        cfg.strategy = gsm::noisy_strategy({args.error_rate, args.threshold});
        cfg.postprocessing = [](gsm::Iofa& m) { gsm::dominant_output_postprocess(m); };
    }
    if (args.compat_on_pta) cfg.eval_compat_on_pta = true;
    if (args.compat_on_futures) cfg.eval_compat_on_futures = true;
    return cfg;
}

json score_json(const gsm::Score& score) {
    if (score.is_accept()) return "accept";
    if (score.is_reject()) return "reject";
    return score.value;
}

int cmd_learn(const LearnArgs& args) {
    std::string raw = read_file(args.shared.input);
    gsm::TraceSet data = args.shared.format == "auto"
                             ? gsm::parse_traces(raw)
                             : gsm::parse_traces(raw, kind_of(args.shared.format));
    gsm::BehaviorConfig behavior = resolve_behavior(args);
    gsm::EngineConfig cfg = make_config(args, behavior);

    std::ostringstream events;
    gsm::Instrumentation instr;
    instr.pta_built = [&](const gsm::Iofa& m) {
        events << json{{"event", "pta_built"}, {"states", m.live_count()}}.dump() << "\n";
    };
    instr.candidate_evaluated = [&](gsm::StateId r, gsm::StateId b, gsm::Score s) {
        events << json{{"event", "candidate_evaluated"}, {"red", r}, {"blue", b},
                       {"score", score_json(s)}}
                      .dump()
               << "\n";
    };
    instr.promoted = [&](gsm::StateId q) {
        events << json{{"event", "promoted"}, {"state", q}}.dump() << "\n";
    };
    instr.merge_applied = [&](gsm::StateId r, gsm::StateId b, const gsm::Partition& p) {
        json classes = json::array();
        for (const auto& cls : p.classes) classes.push_back(cls.members);
        events << json{{"event", "merge_applied"}, {"red", r}, {"blue", b},
                       {"classes", classes}}
                      .dump()
               << "\n";
    };
    instr.finished = [&](const gsm::Iofa& m) {
        events << json{{"event", "finished"}, {"states", m.live_count()}}.dump() << "\n";
    };

    gsm::RunStats stats;
    auto start = std::chrono::steady_clock::now();
    gsm::Iofa model =
        gsm::run_engine(data, cfg, args.shared.events.empty() ? nullptr : &instr, &stats);
    double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();

    gsm::LearnedModel out;
    if (args.no_convert) {
        out = gsm::iofa_to_model(model);
    } else {
        gsm::FamilyOverride over = gsm::FamilyOverride::none;
        if (data.kind == gsm::TraceKind::labeled_words) over = gsm::FamilyOverride::dfa;
        if (data.kind == gsm::TraceKind::observations) over = gsm::FamilyOverride::markov_chain;
        gsm::BehaviorConfig final_behavior = behavior;
        if (args.algorithm == "noisy")
            final_behavior.transition_behavior = gsm::TransitionBehavior::deterministic;
        out = gsm::to_automaton(model, final_behavior, over);
    }

    if (!args.shared.output.empty()) write_file(args.shared.output, gsm::model_to_json(out));
    if (!args.shared.dot.empty()) write_file(args.shared.dot, gsm::to_dot(out));
    if (!args.shared.events.empty()) write_file(args.shared.events, events.str());

    std::cout << "algorithm: " << args.algorithm << "\n"
              << "traces: " << data.size() << " (" << data.total_symbols() << " symbols)\n"
              << "pta states: " << stats.pta_states << "\n"
              << "final states: " << out.states.size() << "\n"
              << "merges: " << stats.merges << "\n"
              << "promotions: " << stats.promotions << "\n"
              << "wall time: " << wall_ms << " ms\n";
    return 0;
}

int cmd_generate(const GenerateArgs& args) {
    if (!args.shared.dot.empty())
        throw gsm::InvalidConfig("generate does not write dot output");
    if (!args.shared.events.empty())
        throw gsm::InvalidConfig("generate does not record events");
    gsm::LearnedModel model = gsm::json_to_model(read_file(args.shared.input));

    gsm::TraceSet data;
    if (args.exhaustive > 0) {
        data = gsm::generate_exhaustive(model, args.exhaustive);
    } else {
        gsm::GenerateOptions options;
        options.count = args.count;
        options.min_length = args.min_length;
        options.max_length = args.max_length;
        options.seed = args.shared.seed;
        options.noise_rate = args.noise_rate;
        data = gsm::generate_traces(model, options);
    }
    if (args.shared.format != "auto" && kind_of(args.shared.format) != data.kind)
        throw gsm::InvalidConfig("this model family emits " + std::string(to_string(data.kind)) +
                                 " traces");

    std::string text = gsm::serialize_traces(data);
    if (args.shared.output.empty())
        std::cout << text;
    else
        write_file(args.shared.output, text);
    return 0;
}

int cmd_visualize(const SharedArgs& args) {
    if (!args.events.empty()) throw gsm::InvalidConfig("visualize does not record events");
    if (args.format != "auto") throw gsm::InvalidConfig("visualize reads model json only");
    gsm::LearnedModel model = gsm::json_to_model(read_file(args.input));
    std::string dot = gsm::to_dot(model);
    if (!args.dot.empty()) write_file(args.dot, dot);
    if (!args.output.empty()) write_file(args.output, dot);
    if (args.dot.empty() && args.output.empty()) std::cout << dot;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"State-merging automata learner"};
    app.require_subcommand(1);

    LearnArgs learn_args;
    CLI::App* learn = app.add_subcommand("learn", "Learn a model from traces");
    add_shared(learn, learn_args.shared, true);
    learn->add_option("--algorithm", learn_args.algorithm, "Merge strategy")
        ->check(CLI::IsMember({"rpni", "edsm", "alergia", "ioalergia", "ioalergia-partition",
                               "ioalergia-edsm", "noisy"}));
    learn->add_option("--output-behavior", learn_args.output_behavior, "moore or mealy")
        ->check(CLI::IsMember({"moore", "mealy"}));
    learn
        ->add_option("--transition-behavior", learn_args.transition_behavior,
                     "deterministic, nondeterministic or stochastic")
        ->check(CLI::IsMember({"deterministic", "nondeterministic", "stochastic"}));
    learn->add_option("--epsilon", learn_args.epsilon, "Hoeffding test parameter");
    learn->add_option("--error-rate", learn_args.error_rate, "Assumed output noise rate");
    learn->add_option("--threshold", learn_args.threshold, "Noise significance threshold");
    learn->add_flag("--min-blue", learn_args.min_blue, "Only consider the minimal blue state");
    learn->add_flag("--depth-first", learn_args.depth_first, "Depth-first future checks");
    learn->add_flag("--compat-on-pta", learn_args.compat_on_pta,
                    "Evaluate compatibility on the frozen tree");
    learn->add_flag("--compat-on-futures", learn_args.compat_on_futures,
                    "Evaluate compatibility on shared futures");
    learn->add_flag("--no-convert", learn_args.no_convert, "Keep the internal representation");

    GenerateArgs generate_args;
    CLI::App* generate = app.add_subcommand("generate", "Sample traces from a model");
    add_shared(generate, generate_args.shared, true);
    generate->add_option("--count", generate_args.count, "Number of traces");
    generate->add_option("--min-length", generate_args.min_length, "Minimum trace length");
    generate->add_option("--max-length", generate_args.max_length, "Maximum trace length");
    generate->add_option("--noise-rate", generate_args.noise_rate,
                         "Per-step output flip probability");
    generate->add_option("--exhaustive", generate_args.exhaustive,
                         "Emit all input words up to this length");

    SharedArgs visualize_args;
    CLI::App* visualize = app.add_subcommand("visualize", "Render a model as DOT");
    add_shared(visualize, visualize_args, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*learn) return cmd_learn(learn_args);
        if (*generate) return cmd_generate(generate_args);
        return cmd_visualize(visualize_args);
    } catch (const gsm::InvalidConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
