#include "lct/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace lct {

namespace {

constexpr int kCheckpointVersion = 1;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (auto it = j.find(key); it != j.end()) return it->get<T>();
    return fallback;
}

} // namespace

json pdf_to_json(const LinearPdf& pdf) {
    if (pdf.is_point()) return pdf.a();
    return pdf.to_string();
}

LinearPdf pdf_from_json(const json& j) {
    if (j.is_number()) return LinearPdf::point(j.get<double>());
    if (j.is_string()) return LinearPdf::parse(j.get<std::string>());
    throw std::invalid_argument("distribution must be a number or an \"L(a,b,h_b)\" string");
}

json mapping_to_json(const LambdaMapping& m) {
    return json{{"family", to_string(m.family)},
                {"lambda_index", m.lambda_index},
                {"fixed", m.fixed}};
}

LambdaMapping mapping_from_json(const json& j) {
    LambdaMapping m;
    m.family = loss_family_from_string(j.at("family").get<std::string>());
    const auto idx = j.at("lambda_index").get<std::vector<int>>();
    const auto fixed = j.at("fixed").get<std::vector<double>>();
    if (idx.size() != 2 || fixed.size() != 2)
        throw std::invalid_argument("lambda mapping arrays must have length 2");
    m.lambda_index = {idx[0], idx[1]};
    m.fixed = {fixed[0], fixed[1]};
    m.validate();
    return m;
}

json optimizer_to_json(const OptimizerConfig& oc) {
    return json{{"base", oc.base == OptimizerConfig::Base::sgd ? "sgd" : "adam"},
                {"sam", oc.sam},
                {"lr", oc.lr},
                {"momentum", oc.momentum},
                {"rho", oc.rho},
                {"adam_beta1", oc.adam_beta1},
                {"adam_beta2", oc.adam_beta2},
                {"adam_eps", oc.adam_eps}};
}

OptimizerConfig optimizer_from_json(const json& j) {
    OptimizerConfig oc;
    const std::string base = get_or<std::string>(j, "base", "sgd");
    if (base == "sgd")
        oc.base = OptimizerConfig::Base::sgd;
    else if (base == "adam")
        oc.base = OptimizerConfig::Base::adam;
    else
        throw std::invalid_argument("optimizer base must be 'sgd' or 'adam', got '" + base + "'");
    oc.sam = get_or(j, "sam", oc.sam);
    oc.lr = get_or(j, "lr", oc.lr);
    oc.momentum = get_or(j, "momentum", oc.momentum);
    oc.rho = get_or(j, "rho", oc.rho);
    oc.adam_beta1 = get_or(j, "adam_beta1", oc.adam_beta1);
    oc.adam_beta2 = get_or(j, "adam_beta2", oc.adam_beta2);
    oc.adam_eps = get_or(j, "adam_eps", oc.adam_eps);
    return oc;
}

json train_config_to_json(const TrainConfig& cfg) {
    json dist = json::array();
    for (const auto& c : cfg.lambda_dist.coords) dist.push_back(pdf_to_json(c));
    return json{{"method", to_string(cfg.method)},
                {"loss_family", to_string(cfg.family)},
                {"mapping", mapping_to_json(cfg.mapping)},
                {"lambda", dist},
                {"optimizer", optimizer_to_json(cfg.optimizer)},
                {"epochs", cfg.epochs},
                {"batch_size", cfg.batch_size},
                {"clip_norm", cfg.clip_norm},
                {"lr_drop_fraction", cfg.lr_drop_fraction},
                {"lr_drop_factor", cfg.lr_drop_factor},
                {"trunk", cfg.trunk},
                {"film_hidden", cfg.film_hidden},
                {"seed", cfg.seed},
                {"trace_path", cfg.trace_path}};
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.method = train_method_from_string(get_or<std::string>(j, "method", "baseline"));
    cfg.family = loss_family_from_string(get_or<std::string>(j, "loss_family", "vs"));
    if (j.contains("mapping"))
        cfg.mapping = mapping_from_json(j.at("mapping"));
    else
        cfg.mapping = LambdaMapping::full(cfg.family);
    cfg.lambda_dist.coords.clear();
    for (const auto& entry : j.at("lambda"))
        cfg.lambda_dist.coords.push_back(pdf_from_json(entry));
    if (j.contains("optimizer")) cfg.optimizer = optimizer_from_json(j.at("optimizer"));
    cfg.epochs = get_or(j, "epochs", cfg.epochs);
    cfg.batch_size = get_or(j, "batch_size", cfg.batch_size);
    cfg.clip_norm = get_or(j, "clip_norm", cfg.clip_norm);
    cfg.lr_drop_fraction = get_or(j, "lr_drop_fraction", cfg.lr_drop_fraction);
    cfg.lr_drop_factor = get_or(j, "lr_drop_factor", cfg.lr_drop_factor);
    cfg.trunk = get_or(j, "trunk", cfg.trunk);
    cfg.film_hidden = get_or(j, "film_hidden", cfg.film_hidden);
    cfg.seed = get_or(j, "seed", cfg.seed);
    cfg.trace_path = get_or(j, "trace_path", cfg.trace_path);
    return cfg;
}

json synthetic_spec_to_json(const SyntheticSpec& spec) {
    return json{{"dim", spec.dim},
                {"separation", spec.separation},
                {"noise_neg", spec.noise_neg},
                {"noise_pos", spec.noise_pos},
                {"n_majority", spec.n_majority},
                {"beta_target", spec.beta_target},
                {"n_test_per_class", spec.n_test_per_class},
                {"seed", spec.seed}};
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
    SyntheticSpec spec;
    spec.dim = get_or(j, "dim", spec.dim);
    spec.separation = get_or(j, "separation", spec.separation);
    spec.noise_neg = get_or(j, "noise_neg", spec.noise_neg);
    spec.noise_pos = get_or(j, "noise_pos", spec.noise_pos);
    spec.n_majority = get_or(j, "n_majority", spec.n_majority);
    spec.beta_target = get_or(j, "beta_target", spec.beta_target);
    spec.n_test_per_class = get_or(j, "n_test_per_class", spec.n_test_per_class);
    spec.seed = get_or(j, "seed", spec.seed);
    spec.validate();
    return spec;
}

json scalars_to_json(const EvalScalars& s) {
    json j;
    for (const auto& name : eval_scalar_names()) j[name] = eval_scalar(s, name);
    return j;
}

EvalScalars scalars_from_json(const json& j) {
    EvalScalars s;
    s.auc = j.at("auc").get<double>();
    s.ap = j.at("ap").get<double>();
    s.brier = j.at("brier").get<double>();
    s.f1_best = j.at("f1_best").get<double>();
    s.balanced_acc_best = j.at("balanced_acc_best").get<double>();
    s.precision_at_recall99 = j.at("precision_at_recall99").get<double>();
    s.tpr = j.at("tpr").get<double>();
    s.fpr = j.at("fpr").get<double>();
    s.precision = j.at("precision").get<double>();
    s.overall_acc = j.at("overall_acc").get<double>();
    s.balanced_acc = j.at("balanced_acc").get<double>();
    s.f1 = j.at("f1").get<double>();
    s.g_mean = j.at("g_mean").get<double>();
    return s;
}

json model_to_json(const TrainedModel& model) {
    return json{{"format_version", kCheckpointVersion},
                {"net",
                 {{"input_dim", model.net_config.input_dim},
                  {"trunk", model.net_config.trunk},
                  {"film_hidden", model.net_config.film_hidden},
                  {"lambda_dim", model.net_config.lambda_dim}}},
                {"params", model.params},
                {"train_config", train_config_to_json(model.config)},
                {"beta", model.beta},
                {"epoch_losses", model.epoch_losses},
                {"feat_mean", model.feat_mean},
                {"feat_std", model.feat_std},
                {"pos_label", model.pos_label},
                {"neg_label", model.neg_label}};
}

TrainedModel model_from_json(const json& j) {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointVersion)
        throw std::invalid_argument("checkpoint format_version " + std::to_string(version) +
                                    " not supported (expected " +
                                    std::to_string(kCheckpointVersion) + ")");
    TrainedModel model;
    const json& net = j.at("net");
    model.net_config.input_dim = net.at("input_dim").get<std::size_t>();
    model.net_config.trunk = net.at("trunk").get<std::vector<std::size_t>>();
    model.net_config.film_hidden = net.at("film_hidden").get<std::size_t>();
    model.net_config.lambda_dim = net.at("lambda_dim").get<std::size_t>();
    model.params = j.at("params").get<std::vector<double>>();
    if (model.params.size() != model.net_config.param_count())
        throw std::invalid_argument("checkpoint parameter vector does not match architecture");
    model.config = train_config_from_json(j.at("train_config"));
    model.beta = j.at("beta").get<double>();
    model.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
    model.feat_mean = j.at("feat_mean").get<std::vector<double>>();
    model.feat_std = j.at("feat_std").get<std::vector<double>>();
    model.pos_label = get_or<std::string>(j, "pos_label", "");
    model.neg_label = get_or<std::string>(j, "neg_label", "");
    return model;
}

void save_model(const TrainedModel& model, const std::string& path) {
    write_json_file(model_to_json(model), path);
}

TrainedModel load_model(const std::string& path) {
    return model_from_json(load_json_file(path));
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("failed to parse '" + path + "': " + e.what());
    }
    return j;
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

} // namespace lct
