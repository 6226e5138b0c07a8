#include "lct/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace lct {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string strip_spaces(std::string s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

std::string sanitize_dir(const std::string& name) {
    std::string out;
    for (char c : lower(name)) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')
            out += c;
        else
            out += '-';
    }
    return out;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hyper_dir_name(const std::vector<LinearPdf>& combo) {
    std::string key;
    for (const auto& p : combo) key += p.to_string() + ";";
    char buf[24];
    std::snprintf(buf, sizeof(buf), "h_%016llx",
                  static_cast<unsigned long long>(fnv1a64(key)));
    return buf;
}

std::string hyper_string(const std::vector<LinearPdf>& combo) {
    std::string s;
    for (std::size_t i = 0; i < combo.size(); ++i)
        s += (i ? "|" : "") + combo[i].to_string();
    return s;
}

std::string lambda_string(const LambdaVec& lambda) {
    std::string s;
    char buf[40];
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12g", lambda[i]);
        s += (i ? "|" : "") + std::string(buf);
    }
    return s;
}

std::string format_beta(double beta) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", beta);
    return buf;
}

template <typename T>
std::vector<std::vector<T>> cross_product(const std::vector<std::vector<T>>& axes) {
    std::vector<std::vector<T>> combos = {{}};
    for (const auto& axis : axes) {
        std::vector<std::vector<T>> next;
        next.reserve(combos.size() * axis.size());
        for (const auto& combo : combos)
            for (const auto& value : axis) {
                auto extended = combo;
                extended.push_back(value);
                next.push_back(std::move(extended));
            }
        combos = std::move(next);
    }
    return combos;
}

const std::vector<std::string>& coordinate_names(LossFamily family) {
    static const std::vector<std::string> focal = {"alpha", "phi"};
    static const std::vector<std::string> vs = {"gamma", "tau"};
    return family == LossFamily::focal ? focal : vs;
}

} // namespace

MethodSpec method_spec_from_name(const std::string& name) {
    MethodSpec spec;
    spec.name = name;
    const auto tokens = split(lower(strip_spaces(name)), '+');
    if (tokens.empty() || tokens[0].empty())
        throw std::invalid_argument("method name '" + name + "' is empty");
    if (tokens[0] == "vs")
        spec.family = LossFamily::vs;
    else if (tokens[0] == "focal")
        spec.family = LossFamily::focal;
    else
        throw std::invalid_argument("method '" + name + "' must start with 'VS' or 'Focal'");

    spec.method = TrainMethod::baseline;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        const std::string& t = tokens[i];
        if (t == "sam") {
            spec.optimizer.sam = true;
        } else if (t == "lct") {
            spec.method = TrainMethod::lct;
        } else if (t == "lct-nofilm" || t == "lctnofilm" || t == "lct_nofilm") {
            spec.method = TrainMethod::lct_no_film;
        } else if (t == "adam") {
            spec.optimizer.base = OptimizerConfig::Base::adam;
        } else if (t == "sgd") {
            spec.optimizer.base = OptimizerConfig::Base::sgd;
        } else {
            throw std::invalid_argument("method '" + name + "': unknown token '" + t + "'");
        }
    }
    spec.mapping = LambdaMapping::full(spec.family);
    return spec;
}

void SweepSpec::validate() const {
    if (methods.empty())
        throw std::invalid_argument("SweepSpec: no methods");
    if (seeds.empty())
        throw std::invalid_argument("SweepSpec: no seeds");
    if (out_dir.empty())
        throw std::invalid_argument("SweepSpec: out_dir is empty");
    if (!dataset.synthetic && dataset.train_csv.empty())
        throw std::invalid_argument("SweepSpec: CSV dataset needs train_csv");
    if (!dataset.synthetic && dataset.test_csv.empty())
        throw std::invalid_argument("SweepSpec: CSV dataset needs test_csv");
    for (const auto& m : methods) {
        const std::size_t dim = static_cast<std::size_t>(m.mapping.lambda_dim());
        if (m.train_axes.size() != dim)
            throw std::invalid_argument("method '" + m.name + "': train grid has " +
                                        std::to_string(m.train_axes.size()) +
                                        " axes, lambda has " + std::to_string(dim));
        for (const auto& axis : m.train_axes)
            if (axis.empty())
                throw std::invalid_argument("method '" + m.name + "': empty train axis");
        if (m.method == TrainMethod::baseline) {
            for (const auto& axis : m.train_axes)
                for (const auto& pdf : axis)
                    if (!pdf.is_point())
                        throw std::invalid_argument("method '" + m.name +
                                                    "': baseline requires point lambdas");
        } else {
            if (m.eval_axes.size() != dim)
                throw std::invalid_argument("method '" + m.name + "': eval grid has " +
                                            std::to_string(m.eval_axes.size()) +
                                            " axes, lambda has " + std::to_string(dim));
            for (const auto& axis : m.eval_axes)
                if (axis.empty())
                    throw std::invalid_argument("method '" + m.name + "': empty eval axis");
        }
    }
}

SweepSpec sweep_spec_from_json(const json& j) {
    SweepSpec spec;
    const json& ds = j.at("dataset");
    if (ds.contains("synthetic")) {
        spec.dataset.synthetic = true;
        spec.dataset.spec = synthetic_spec_from_json(ds.at("synthetic"));
    } else {
        spec.dataset.synthetic = false;
        spec.dataset.train_csv = ds.at("train_csv").get<std::string>();
        spec.dataset.test_csv = ds.at("test_csv").get<std::string>();
        if (ds.contains("label_column"))
            spec.dataset.label_column = ds.at("label_column").get<std::string>();
    }
    if (j.contains("betas")) spec.betas = j.at("betas").get<std::vector<double>>();
    if (j.contains("seeds")) spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("epochs")) spec.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("batch_size")) spec.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("clip_norm")) spec.clip_norm = j.at("clip_norm").get<double>();
    if (j.contains("lr_drop_fraction"))
        spec.lr_drop_fraction = j.at("lr_drop_fraction").get<double>();
    if (j.contains("lr_drop_factor")) spec.lr_drop_factor = j.at("lr_drop_factor").get<double>();
    if (j.contains("trunk")) spec.trunk = j.at("trunk").get<std::vector<std::size_t>>();
    if (j.contains("film_hidden")) spec.film_hidden = j.at("film_hidden").get<std::size_t>();
    if (j.contains("data_seed")) spec.data_seed = j.at("data_seed").get<std::uint64_t>();
    if (j.contains("recall_grid"))
        spec.recall_grid = j.at("recall_grid").get<std::vector<double>>();
    if (j.contains("out_dir")) spec.out_dir = j.at("out_dir").get<std::string>();

    for (const json& mj : j.at("methods")) {
        MethodSpec m = method_spec_from_name(mj.at("name").get<std::string>());
        if (mj.contains("optimizer")) {
            OptimizerConfig oc = optimizer_from_json(mj.at("optimizer"));
            oc.sam = m.optimizer.sam || oc.sam; // the name is authoritative for SAM
            m.optimizer = oc;
        }
        if (mj.contains("lambda_coords")) {
            const auto coords = mj.at("lambda_coords").get<std::vector<std::string>>();
            const auto& names = coordinate_names(m.family);
            if (coords.size() == 2 && coords[0] == names[0] && coords[1] == names[1]) {
                m.mapping = LambdaMapping::full(m.family);
            } else if (coords.size() == 1) {
                int varying = -1;
                for (int k = 0; k < 2; ++k)
                    if (coords[0] == names[k]) varying = k;
                if (varying < 0)
                    throw std::invalid_argument("method '" + m.name + "': unknown coordinate '" +
                                                coords[0] + "'");
                const std::string other = names[varying == 0 ? 1 : 0];
                double fixed_value = 0.0;
                if (mj.contains("fixed") && mj.at("fixed").contains(other))
                    fixed_value = mj.at("fixed").at(other).get<double>();
                m.mapping = LambdaMapping::single(m.family, varying, fixed_value);
            } else {
                throw std::invalid_argument("method '" + m.name + "': lambda_coords must be " +
                                            names[0] + "/" + names[1] + " or a single name");
            }
        }
        for (const json& axis : mj.at("train_grid")) {
            std::vector<LinearPdf> pdfs;
            for (const json& entry : axis) pdfs.push_back(pdf_from_json(entry));
            m.train_axes.push_back(std::move(pdfs));
        }
        if (mj.contains("eval_grid"))
            for (const json& axis : mj.at("eval_grid"))
                m.eval_axes.push_back(axis.get<std::vector<double>>());
        spec.methods.push_back(std::move(m));
    }
    spec.validate();
    return spec;
}

json sweep_spec_to_json(const SweepSpec& spec) {
    json dsj;
    if (spec.dataset.synthetic)
        dsj["synthetic"] = synthetic_spec_to_json(spec.dataset.spec);
    else
        dsj = json{{"train_csv", spec.dataset.train_csv},
                   {"test_csv", spec.dataset.test_csv},
                   {"label_column", spec.dataset.label_column}};
    json methods = json::array();
    for (const auto& m : spec.methods) {
        json mj{{"name", m.name}, {"optimizer", optimizer_to_json(m.optimizer)}};
        const auto& names = coordinate_names(m.family);
        json coords = json::array();
        json fixed = json::object();
        for (int k = 0; k < 2; ++k) {
            if (m.mapping.lambda_index[k] >= 0)
                coords.push_back(names[k]);
            else
                fixed[names[k]] = m.mapping.fixed[k];
        }
        mj["lambda_coords"] = coords;
        if (!fixed.empty()) mj["fixed"] = fixed;
        json train = json::array();
        for (const auto& axis : m.train_axes) {
            json aj = json::array();
            for (const auto& pdf : axis) aj.push_back(pdf_to_json(pdf));
            train.push_back(aj);
        }
        mj["train_grid"] = train;
        if (!m.eval_axes.empty()) mj["eval_grid"] = m.eval_axes;
        methods.push_back(std::move(mj));
    }
    return json{{"dataset", dsj},
                {"betas", spec.betas},
                {"methods", methods},
                {"seeds", spec.seeds},
                {"epochs", spec.epochs},
                {"batch_size", spec.batch_size},
                {"clip_norm", spec.clip_norm},
                {"lr_drop_fraction", spec.lr_drop_fraction},
                {"lr_drop_factor", spec.lr_drop_factor},
                {"trunk", spec.trunk},
                {"film_hidden", spec.film_hidden},
                {"data_seed", spec.data_seed},
                {"recall_grid", spec.recall_grid},
                {"out_dir", spec.out_dir}};
}

namespace {

struct PreparedData {
    double beta_label = 0.0;
    Dataset train;
    Dataset test;
};

std::vector<PreparedData> prepare_datasets(const SweepSpec& spec) {
    std::vector<PreparedData> out;
    if (spec.dataset.synthetic) {
        std::vector<double> betas = spec.betas;
        if (betas.empty()) betas.push_back(spec.dataset.spec.beta_target);
        for (double beta : betas) {
            SyntheticSpec s = spec.dataset.spec;
            s.beta_target = beta;
            SyntheticData data = generate_synthetic(s);
            out.push_back({beta, std::move(data.train), std::move(data.test)});
        }
        return out;
    }
    Dataset train0 = load_csv(spec.dataset.train_csv, spec.dataset.label_column);
    Dataset test = load_csv(spec.dataset.test_csv, spec.dataset.label_column, train0);
    if (spec.betas.empty()) {
        const double beta = train0.beta();
        out.push_back({beta, std::move(train0), std::move(test)});
        return out;
    }
    Rng data_rng(spec.data_seed);
    for (std::size_t bi = 0; bi < spec.betas.size(); ++bi) {
        Rng sub = data_rng.split(bi);
        out.push_back({spec.betas[bi], subsample_to_beta(train0, spec.betas[bi], sub), test});
    }
    return out;
}

struct CellTask {
    std::size_t data_index = 0;
    std::size_t method_index = 0;
    std::vector<LinearPdf> hyper;
    std::vector<LambdaVec> eval_grid;
    std::string cell_dir; // relative to the store root
    std::uint64_t seed = 0;
};

TrainConfig make_train_config(const SweepSpec& spec, const MethodSpec& method,
                              const std::vector<LinearPdf>& hyper, std::uint64_t seed,
                              const std::string& trace_path) {
    TrainConfig cfg;
    cfg.method = method.method;
    cfg.family = method.family;
    cfg.mapping = method.mapping;
    cfg.lambda_dist.coords = hyper;
    cfg.optimizer = method.optimizer;
    cfg.epochs = spec.epochs;
    cfg.batch_size = spec.batch_size;
    cfg.clip_norm = spec.clip_norm;
    cfg.lr_drop_fraction = spec.lr_drop_fraction;
    cfg.lr_drop_factor = spec.lr_drop_factor;
    cfg.trunk = spec.trunk;
    cfg.film_hidden = spec.film_hidden;
    cfg.seed = seed;
    cfg.trace_path = trace_path;
    return cfg;
}

std::string eval_file_name(std::size_t k) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "eval_%03zu.json", k);
    return buf;
}

void run_cell(const SweepSpec& spec, const std::vector<PreparedData>& data,
              const CellTask& task) {
    const MethodSpec& method = spec.methods[task.method_index];
    const PreparedData& prepared = data[task.data_index];
    const fs::path seed_dir =
        fs::path(spec.out_dir) / task.cell_dir / ("seed_" + std::to_string(task.seed));
    fs::create_directories(seed_dir);
    try {
        TrainConfig cfg = make_train_config(spec, method, task.hyper, task.seed,
                                            (seed_dir / "trace.jsonl").string());
        TrainedModel model = train(cfg, prepared.train);
        save_model(model, (seed_dir / "checkpoint.json").string());
        const std::vector<EvalReport> reports = evaluate(model, prepared.test, task.eval_grid);
        for (std::size_t k = 0; k < reports.size(); ++k) {
            json j{{"lambda", reports[k].lambda},
                   {"scalars", scalars_to_json(reports[k].scalars)}};
            write_json_file(j, (seed_dir / eval_file_name(k)).string());
        }
    } catch (const std::exception& e) {
        write_json_file(json{{"error", e.what()}}, (seed_dir / "error.json").string());
    }
}

constexpr const char* kAggregateMetrics[] = {
    "auc", "ap", "brier", "f1_best", "balanced_acc_best", "precision_at_recall99"};

bool metric_lower_is_better(const std::string& metric) {
    return metric == "brier" || metric == "fpr";
}

// Seed-averaged scalar rows of one cell, in eval-grid order.
struct CellRows {
    std::vector<LambdaVec> lambdas;
    std::vector<EvalScalars> mean;
    std::vector<std::vector<EvalScalars>> per_seed; // [grid][seed]
    std::vector<std::uint64_t> seeds_used;
};

CellRows load_cell(const fs::path& root, const json& cell) {
    CellRows rows;
    const std::size_t grid = cell.at("eval_grid").get<std::vector<LambdaVec>>().size();
    std::vector<std::vector<EvalReport>> per_seed;
    for (const auto& seed : cell.at("seeds").get<std::vector<std::uint64_t>>()) {
        const fs::path seed_dir =
            root / cell.at("dir").get<std::string>() / ("seed_" + std::to_string(seed));
        if (fs::exists(seed_dir / "error.json") || !fs::exists(seed_dir / eval_file_name(0)))
            continue;
        std::vector<EvalReport> reports;
        for (std::size_t k = 0; k < grid; ++k) {
            const json j = load_json_file((seed_dir / eval_file_name(k)).string());
            EvalReport rep;
            rep.lambda = j.at("lambda").get<LambdaVec>();
            rep.scalars = scalars_from_json(j.at("scalars"));
            reports.push_back(std::move(rep));
        }
        per_seed.push_back(std::move(reports));
        rows.seeds_used.push_back(seed);
    }
    if (per_seed.empty()) return rows;
    const auto averaged = seed_average(per_seed);
    for (const auto& avg : averaged) {
        rows.lambdas.push_back(avg.lambda);
        rows.mean.push_back(avg.mean);
        rows.per_seed.push_back(avg.per_seed);
    }
    return rows;
}

} // namespace

ResultStore ResultStore::open(const std::string& root) {
    ResultStore store;
    store.root = root;
    store.manifest = load_json_file((fs::path(root) / "manifest.json").string());
    return store;
}

ResultStore run_sweep(const SweepSpec& spec, unsigned workers) {
    spec.validate();
    fs::create_directories(spec.out_dir);
    const std::vector<PreparedData> data = prepare_datasets(spec);

    json cells = json::array();
    std::vector<CellTask> tasks;
    for (std::size_t di = 0; di < data.size(); ++di) {
        for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
            const MethodSpec& method = spec.methods[mi];
            const auto combos = cross_product(method.train_axes);
            for (const auto& combo : combos) {
                std::vector<LambdaVec> eval_grid;
                if (method.method == TrainMethod::baseline) {
                    LambdaVec point;
                    for (const auto& pdf : combo) point.push_back(pdf.a());
                    eval_grid.push_back(std::move(point));
                } else {
                    eval_grid = cross_product(method.eval_axes);
                }
                const std::string dir = "beta_" + format_beta(data[di].beta_label) + "/" +
                                        sanitize_dir(method.name) + "/" + hyper_dir_name(combo);
                json hyper = json::array();
                for (const auto& pdf : combo) hyper.push_back(pdf_to_json(pdf));
                cells.push_back(json{{"beta", data[di].beta_label},
                                     {"method", method.name},
                                     {"dir", dir},
                                     {"train_hyper", hyper},
                                     {"hyper_string", hyper_string(combo)},
                                     {"eval_grid", eval_grid},
                                     {"seeds", spec.seeds}});
                for (std::uint64_t seed : spec.seeds)
                    tasks.push_back({di, mi, combo, eval_grid, dir, seed});
            }
        }
    }

    ResultStore store;
    store.root = spec.out_dir;
    store.manifest = json{{"spec", sweep_spec_to_json(spec)}, {"cells", cells}};
    write_json_file(store.manifest, (fs::path(spec.out_dir) / "manifest.json").string());

    if (workers <= 1) {
        for (const auto& task : tasks) run_cell(spec, data, task);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) break;
                run_cell(spec, data, tasks[i]);
            }
        };
        std::vector<std::thread> pool;
        const unsigned count = std::min<unsigned>(workers, tasks.size() ? tasks.size() : 1);
        for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    write_aggregates(store);
    return store;
}

void write_aggregates(const ResultStore& store) {
    const fs::path root(store.root);
    const fs::path agg = root / "aggregates";
    fs::create_directories(agg);
    const SweepSpec spec = sweep_spec_from_json(store.manifest.at("spec"));

    struct Row {
        double beta;
        std::string method;
        std::string hyper;
        std::string cell_dir;
        LambdaVec lambda;
        EvalScalars mean;
        std::vector<EvalScalars> per_seed;
        std::vector<std::uint64_t> seeds_used;
    };
    std::vector<Row> rows;
    for (const json& cell : store.manifest.at("cells")) {
        const CellRows loaded = load_cell(root, cell);
        for (std::size_t k = 0; k < loaded.lambdas.size(); ++k)
            rows.push_back({cell.at("beta").get<double>(),
                            cell.at("method").get<std::string>(),
                            cell.at("hyper_string").get<std::string>(),
                            cell.at("dir").get<std::string>(), loaded.lambdas[k],
                            loaded.mean[k], loaded.per_seed[k], loaded.seeds_used});
    }

    for (const char* metric : kAggregateMetrics) {
        std::ofstream out(agg / (std::string(metric) + ".csv"));
        out << "beta,method,hyper,eval_lambda,mean";
        for (std::uint64_t seed : spec.seeds) out << ",seed_" << seed;
        out << "\n";
        char buf[40];
        for (const auto& row : rows) {
            std::snprintf(buf, sizeof(buf), "%.17g", eval_scalar(row.mean, metric));
            out << format_beta(row.beta) << "," << row.method << "," << row.hyper << ","
                << lambda_string(row.lambda) << "," << buf;
            for (std::size_t s = 0; s < spec.seeds.size(); ++s) {
                out << ",";
                // Column order follows spec.seeds; a failed seed leaves a blank.
                for (std::size_t u = 0; u < row.seeds_used.size(); ++u) {
                    if (row.seeds_used[u] == spec.seeds[s]) {
                        std::snprintf(buf, sizeof(buf), "%.17g",
                                      eval_scalar(row.per_seed[u], metric));
                        out << buf;
                        break;
                    }
                }
            }
            out << "\n";
        }
    }

    json summary = json::object();
    for (const char* metric : kAggregateMetrics) {
        const std::string direction = metric_lower_is_better(metric) ? "min" : "max";
        json per_method = json::object();
        for (const auto& best : best_per_method(store, metric, direction)) {
            json entry{{"value", best.value},
                       {"beta", best.beta},
                       {"hyper", best.hyper},
                       {"eval_lambda", best.eval_lambda},
                       {"cell_dir", best.cell_dir}};
            const std::string key = best.method + " @ beta=" + format_beta(best.beta);
            per_method[key] = std::move(entry);
        }
        summary[metric] = {{"direction", direction}, {"best", per_method}};
    }
    write_json_file(summary, (agg / "summary.json").string());
}

std::vector<BestCell> best_per_method(const ResultStore& store, const std::string& metric,
                                      const std::string& direction) {
    eval_scalar(EvalScalars{}, metric); // validates the name
    if (direction != "max" && direction != "min")
        throw std::invalid_argument("best_per_method: direction must be 'max' or 'min'");
    const bool want_min = direction == "min";
    const fs::path root(store.root);

    std::vector<BestCell> best;
    auto find_slot = [&](const std::string& method, double beta) -> BestCell& {
        for (auto& b : best)
            if (b.method == method && b.beta == beta) return b;
        best.push_back(BestCell{method, beta, "", {}, want_min ? 1e300 : -1e300, ""});
        return best.back();
    };

    for (const json& cell : store.manifest.at("cells")) {
        const CellRows loaded = load_cell(root, cell);
        for (std::size_t k = 0; k < loaded.lambdas.size(); ++k) {
            const double value = eval_scalar(loaded.mean[k], metric);
            BestCell& slot = find_slot(cell.at("method").get<std::string>(),
                                       cell.at("beta").get<double>());
            const bool better = want_min ? value < slot.value : value > slot.value;
            if (better) {
                slot.value = value;
                slot.hyper = cell.at("hyper_string").get<std::string>();
                slot.eval_lambda = loaded.lambdas[k];
                slot.cell_dir = cell.at("dir").get<std::string>();
            }
        }
    }
    return best;
}

void emit_curves(const ResultStore& store, const CurveSelection& selection) {
    const fs::path root(store.root);
    const SweepSpec spec = sweep_spec_from_json(store.manifest.at("spec"));
    const auto best = best_per_method(store, selection.metric, selection.direction);
    const std::vector<PreparedData> data = prepare_datasets(spec);

    for (const auto& cell : best) {
        if (!selection.methods.empty() &&
            std::find(selection.methods.begin(), selection.methods.end(), cell.method) ==
                selection.methods.end())
            continue;
        const PreparedData* prepared = nullptr;
        for (const auto& d : data)
            if (d.beta_label == cell.beta) prepared = &d;
        if (!prepared)
            throw std::runtime_error("emit_curves: no dataset for beta " +
                                     format_beta(cell.beta));

        const fs::path out_dir = root / "curves" /
                                 (sanitize_dir(cell.method) + "_beta_" + format_beta(cell.beta));
        fs::create_directories(out_dir);

        // Per-seed curves and precision-at-recall rows at the best eval lambda.
        std::vector<std::vector<double>> par_rows; // [seed][recall index]
        std::vector<std::uint64_t> seeds_used;
        for (std::uint64_t seed : spec.seeds) {
            const fs::path seed_dir = root / cell.cell_dir / ("seed_" + std::to_string(seed));
            if (!fs::exists(seed_dir / "checkpoint.json")) continue;
            const TrainedModel model = load_model((seed_dir / "checkpoint.json").string());
            const ScoredSet scored = score_dataset(model, prepared->test, cell.eval_lambda);
            auto [roc_curve, auc] = roc_auc(scored);
            auto [pr_curve, ap] = pr_ap(scored);
            (void)auc;
            (void)ap;
            {
                std::ofstream out(out_dir / ("seed_" + std::to_string(seed) + "_roc.csv"));
                write_curve_csv(roc_curve, out);
            }
            {
                std::ofstream out(out_dir / ("seed_" + std::to_string(seed) + "_pr.csv"));
                write_curve_csv(pr_curve, out);
            }
            std::vector<double> row;
            for (double recall : spec.recall_grid)
                row.push_back(precision_at_recall(scored, recall));
            par_rows.push_back(std::move(row));
            seeds_used.push_back(seed);
        }

        {
            std::ofstream out(out_dir / "precision_at_recall.csv");
            out << "recall,mean";
            for (std::uint64_t seed : seeds_used) out << ",seed_" << seed;
            out << "\n";
            char buf[40];
            for (std::size_t r = 0; r < spec.recall_grid.size(); ++r) {
                double mean = 0.0;
                for (const auto& row : par_rows) mean += row[r];
                if (!par_rows.empty()) mean /= static_cast<double>(par_rows.size());
                std::snprintf(buf, sizeof(buf), "%.17g", spec.recall_grid[r]);
                out << buf;
                std::snprintf(buf, sizeof(buf), "%.17g", mean);
                out << "," << buf;
                for (const auto& row : par_rows) {
                    std::snprintf(buf, sizeof(buf), "%.17g", row[r]);
                    out << "," << buf;
                }
                out << "\n";
            }
        }

        // Adaptability scatter: one row per evaluation lambda (seed-averaged).
        for (const json& mcell : store.manifest.at("cells")) {
            if (mcell.at("dir").get<std::string>() != cell.cell_dir) continue;
            const CellRows loaded = load_cell(root, mcell);
            std::ofstream out(out_dir / "scatter.csv");
            out << "eval_lambda,auc,ap,brier,f1_best,balanced_acc_best,precision_at_recall99\n";
            char buf[40];
            for (std::size_t k = 0; k < loaded.lambdas.size(); ++k) {
                out << lambda_string(loaded.lambdas[k]);
                for (const char* metric : kAggregateMetrics) {
                    std::snprintf(buf, sizeof(buf), "%.17g",
                                  eval_scalar(loaded.mean[k], metric));
                    out << "," << buf;
                }
                out << "\n";
            }
        }
    }
}

} // namespace lct
