/*
 * Copyright 2026 The domainshift Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "domainshift/harness/config.hpp"

#include "domainshift/error.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace domainshift
{

namespace
{

std::string_view variant_name(CgdVariant v)
{
    return v == CgdVariant::kInnerProduct ? "inner-product" : "scaled-cosine";
}

CgdVariant parse_variant(const std::string& s)
{
    if (s == "inner-product") return CgdVariant::kInnerProduct;
    if (s == "scaled-cosine") return CgdVariant::kScaledCosine;
    throw ConfigError(fmt::format("unknown CGD variant '{}'", s));
}

std::string_view theta_name(ThetaGradient t)
{
    return t == ThetaGradient::kRaw ? "raw" : "scaled";
}

ThetaGradient parse_theta(const std::string& s)
{
    if (s == "raw") return ThetaGradient::kRaw;
    if (s == "scaled") return ThetaGradient::kScaled;
    throw ConfigError(fmt::format("unknown theta gradient '{}'", s));
}

std::string_view sampling_name(Sampling::Mode m)
{
    return m == Sampling::Mode::kFullBatch ? "full-batch" : "minibatch";
}

Sampling::Mode parse_sampling(const std::string& s)
{
    if (s == "full-batch") return Sampling::Mode::kFullBatch;
    if (s == "minibatch") return Sampling::Mode::kMinibatch;
    throw ConfigError(fmt::format("unknown sampling mode '{}'", s));
}

std::string_view head_name(Head h)
{
    return h == Head::kSoftmax ? "softmax" : "reference-class";
}

Head parse_head(const std::string& s)
{
    if (s == "softmax") return Head::kSoftmax;
    if (s == "reference-class") return Head::kReferenceClass;
    throw ConfigError(fmt::format("unknown head '{}'", s));
}

std::string_view exec_name(Exec e)
{
    return e == Exec::kSerial ? "serial" : "parallel";
}

Exec parse_exec(const std::string& s)
{
    if (s == "serial") return Exec::kSerial;
    if (s == "parallel") return Exec::kParallel;
    throw ConfigError(fmt::format("unknown exec mode '{}'", s));
}

/// Reads the keys of a map node and rejects unknown ones.
class Section
{
public:
    Section(const YAML::Node& node, std::string path,
            std::initializer_list<const char*> keys)
        : node_(node), path_(std::move(path))
    {
        if (!node_ || node_.IsNull())
        {
            return;
        }
        if (!node_.IsMap())
        {
            throw ConfigError(fmt::format("'{}' must be a mapping", path_));
        }
        const std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& kv : node_)
        {
            const auto key = kv.first.as<std::string>();
            if (allowed.count(key) == 0)
            {
                throw ConfigError(fmt::format("unknown key '{}{}'", prefix(), key));
            }
        }
    }

    template <typename T>
    void read(const char* key, T& out) const
    {
        if (!node_ || node_.IsNull() || !node_[key])
        {
            return;
        }
        try
        {
            out = node_[key].template as<T>();
        }
        catch (const YAML::Exception&)
        {
            throw ConfigError(fmt::format("bad value for '{}{}'", prefix(), key));
        }
    }

    template <typename E>
    void read_enum(const char* key, E& out, E (*parse)(const std::string&)) const
    {
        std::string s;
        read(key, s);
        if (!s.empty())
        {
            out = parse(s);
        }
    }

    YAML::Node child(const char* key) const
    {
        return node_ && node_.IsMap() ? node_[key] : YAML::Node();
    }

    std::string child_path(const char* key) const { return prefix() + key; }

private:
    std::string prefix() const { return path_.empty() ? "" : path_ + "."; }

    YAML::Node node_;
    std::string path_;
};

/// Shortest decimal that parses back to the same double.
std::string num(double v) { return fmt::format("{}", v); }

std::vector<std::string> nums(const std::vector<double>& v)
{
    std::vector<std::string> out;
    for (double x : v)
    {
        out.push_back(num(x));
    }
    return out;
}

}  // namespace

void ExperimentConfig::validate() const
{
    task.validate();
    if (!is_csd())
    {
        (void)parse_algorithm(algorithm);
    }
    train.validate();
    train.crossgrad.validate();
    csd.validate();
    if (seeds.empty())
    {
        throw ConfigError("at least one seed is required");
    }
    if (threads < 0)
    {
        throw ConfigError("threads must be >= 0");
    }
    if (!(tolerance_scale > 0.0))
    {
        throw ConfigError("tolerance_scale must be positive");
    }
}

SynthTask ExperimentConfig::task_for(std::uint64_t seed) const
{
    SynthTask t = task;
    t.seed = seed;
    return t;
}

TrainConfig ExperimentConfig::train_for(std::uint64_t seed) const
{
    TrainConfig t = train;
    t.algorithm = parse_algorithm(algorithm);
    t.seed = seed;
    t.crossgrad.seed = seed;
    return t;
}

CSDTrainConfig ExperimentConfig::csd_for(std::uint64_t seed) const
{
    CSDTrainConfig c = csd;
    c.seed = seed;
    return c;
}

ExperimentConfig parse_config(std::string_view text)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(std::string(text));
    }
    catch (const YAML::Exception& e)
    {
        throw ConfigError(fmt::format("config parse error: {}", e.what()));
    }
    ExperimentConfig cfg;
    const Section top(root, "",
                      {"task", "algorithm", "seeds", "output", "threads",
                       "tolerance_scale"});
    top.read("seeds", cfg.seeds);
    top.read("output", cfg.output);
    top.read("threads", cfg.threads);
    top.read("tolerance_scale", cfg.tolerance_scale);

    const Section task(top.child("task"), "task",
                       {"name", "sizes", "test_size", "flip_rate", "noisy_test",
                        "corruption_rate", "spurious_agreement", "corrupt_test",
                        "beta", "sigma", "dg_train_domains", "noise_is_std"});
    task.read_enum("name", cfg.task.kind, +[](const std::string& s) {
        return parse_task(s);
    });
    task.read("sizes", cfg.task.sizes);
    task.read("test_size", cfg.task.test_size);
    task.read("flip_rate", cfg.task.flip_rate);
    task.read("noisy_test", cfg.task.noisy_test);
    task.read("corruption_rate", cfg.task.corruption_rate);
    task.read("spurious_agreement", cfg.task.spurious_agreement);
    task.read("corrupt_test", cfg.task.corrupt_test);
    task.read("beta", cfg.task.beta);
    task.read("sigma", cfg.task.sigma);
    task.read("dg_train_domains", cfg.task.dg_train_domains);
    task.read("noise_is_std", cfg.task.noise_is_std);

    const Section alg(top.child("algorithm"), "algorithm",
                      {"name", "lr", "epochs", "eta_alpha", "p", "C", "variant",
                       "theta_gradient", "sampling", "batch_size", "hidden", "head",
                       "divergence_threshold", "exec", "early_stopping",
                       "crossgrad", "csd"});
    TrainConfig& t = cfg.train;
    alg.read("name", cfg.algorithm);
    alg.read("lr", t.lr);
    alg.read("epochs", t.epochs);
    alg.read("eta_alpha", t.eta_alpha);
    alg.read("p", t.p);
    alg.read("C", t.C);
    alg.read_enum("variant", t.variant, &parse_variant);
    alg.read_enum("theta_gradient", t.theta_gradient, &parse_theta);
    alg.read_enum("sampling", t.sampling, &parse_sampling);
    alg.read("batch_size", t.batch_size);
    alg.read("hidden", t.hidden);
    alg.read_enum("head", t.head, &parse_head);
    alg.read("divergence_threshold", t.divergence_threshold);
    alg.read_enum("exec", t.exec, &parse_exec);

    const Section es(alg.child("early_stopping"), alg.child_path("early_stopping"),
                     {"enabled", "patience"});
    es.read("enabled", t.early_stopping.enabled);
    es.read("patience", t.early_stopping.patience);

    const Section cg(alg.child("crossgrad"), alg.child_path("crossgrad"),
                     {"eps_label", "eps_domain", "alpha_label", "alpha_domain",
                      "domain_hidden", "per_example"});
    cg.read("eps_label", t.crossgrad.eps_label);
    cg.read("eps_domain", t.crossgrad.eps_domain);
    cg.read("alpha_label", t.crossgrad.alpha_label);
    cg.read("alpha_domain", t.crossgrad.alpha_domain);
    cg.read("domain_hidden", t.crossgrad.domain_hidden);
    cg.read("per_example", t.crossgrad.per_example);
    t.crossgrad.lr = t.lr;
    t.crossgrad.epochs = t.epochs;

    const Section cs(alg.child("csd"), alg.child_path("csd"),
                     {"k", "lambda", "kappa", "init_scale", "head"});
    cfg.csd.lr = t.lr;
    cfg.csd.epochs = t.epochs;
    cfg.csd.hidden = t.hidden;
    cfg.csd.divergence_threshold = t.divergence_threshold;
    cs.read("k", cfg.csd.k);
    cs.read("lambda", cfg.csd.lambda);
    cs.read("kappa", cfg.csd.kappa);
    cs.read("init_scale", cfg.csd.init_scale);
    cs.read_enum("head", cfg.csd.head, &parse_head);

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError(fmt::format("cannot open config '{}'", path));
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& cfg)
{
    const TrainConfig& t = cfg.train;
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "task" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << std::string(to_string(cfg.task.kind));
    e << YAML::Key << "sizes" << YAML::Value << YAML::Flow << cfg.task.sizes;
    e << YAML::Key << "test_size" << YAML::Value << cfg.task.test_size;
    e << YAML::Key << "flip_rate" << YAML::Value << num(cfg.task.flip_rate);
    e << YAML::Key << "noisy_test" << YAML::Value << cfg.task.noisy_test;
    e << YAML::Key << "corruption_rate" << YAML::Value << num(cfg.task.corruption_rate);
    e << YAML::Key << "spurious_agreement" << YAML::Value << num(cfg.task.spurious_agreement);
    e << YAML::Key << "corrupt_test" << YAML::Value << cfg.task.corrupt_test;
    e << YAML::Key << "beta" << YAML::Value << YAML::Flow << nums(cfg.task.beta);
    e << YAML::Key << "sigma" << YAML::Value << YAML::Flow << nums(cfg.task.sigma);
    e << YAML::Key << "dg_train_domains" << YAML::Value << cfg.task.dg_train_domains;
    e << YAML::Key << "noise_is_std" << YAML::Value << cfg.task.noise_is_std;
    e << YAML::EndMap;

    e << YAML::Key << "algorithm" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << cfg.algorithm;
    e << YAML::Key << "lr" << YAML::Value << num(t.lr);
    e << YAML::Key << "epochs" << YAML::Value << t.epochs;
    e << YAML::Key << "eta_alpha" << YAML::Value << num(t.eta_alpha);
    e << YAML::Key << "p" << YAML::Value << num(t.p);
    e << YAML::Key << "C" << YAML::Value << num(t.C);
    e << YAML::Key << "variant" << YAML::Value << std::string(variant_name(t.variant));
    e << YAML::Key << "theta_gradient" << YAML::Value
      << std::string(theta_name(t.theta_gradient));
    e << YAML::Key << "sampling" << YAML::Value << std::string(sampling_name(t.sampling));
    e << YAML::Key << "batch_size" << YAML::Value << t.batch_size;
    e << YAML::Key << "hidden" << YAML::Value << YAML::Flow << t.hidden;
    e << YAML::Key << "head" << YAML::Value << std::string(head_name(t.head));
    e << YAML::Key << "divergence_threshold" << YAML::Value << num(t.divergence_threshold);
    e << YAML::Key << "exec" << YAML::Value << std::string(exec_name(t.exec));
    e << YAML::Key << "early_stopping" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "enabled" << YAML::Value << t.early_stopping.enabled;
    e << YAML::Key << "patience" << YAML::Value << t.early_stopping.patience;
    e << YAML::EndMap;
    e << YAML::Key << "crossgrad" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "eps_label" << YAML::Value << num(t.crossgrad.eps_label);
    e << YAML::Key << "eps_domain" << YAML::Value << num(t.crossgrad.eps_domain);
    e << YAML::Key << "alpha_label" << YAML::Value << num(t.crossgrad.alpha_label);
    e << YAML::Key << "alpha_domain" << YAML::Value << num(t.crossgrad.alpha_domain);
    e << YAML::Key << "domain_hidden" << YAML::Value << YAML::Flow
      << t.crossgrad.domain_hidden;
    e << YAML::Key << "per_example" << YAML::Value << t.crossgrad.per_example;
    e << YAML::EndMap;
    e << YAML::Key << "csd" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "k" << YAML::Value << cfg.csd.k;
    e << YAML::Key << "lambda" << YAML::Value << num(cfg.csd.lambda);
    e << YAML::Key << "kappa" << YAML::Value << num(cfg.csd.kappa);
    e << YAML::Key << "init_scale" << YAML::Value << num(cfg.csd.init_scale);
    e << YAML::Key << "head" << YAML::Value << std::string(head_name(cfg.csd.head));
    e << YAML::EndMap;
    e << YAML::EndMap;

    e << YAML::Key << "seeds" << YAML::Value << YAML::Flow << cfg.seeds;
    e << YAML::Key << "output" << YAML::Value << cfg.output;
    e << YAML::Key << "threads" << YAML::Value << cfg.threads;
    e << YAML::Key << "tolerance_scale" << YAML::Value << num(cfg.tolerance_scale);
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

void apply_seed_override(ExperimentConfig& cfg, const char* value)
{
    if (value == nullptr || *value == '\0')
    {
        return;
    }
    const std::string_view s(value);
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (ec != std::errc() || ptr != s.data() + s.size())
    {
        throw ConfigError(fmt::format("{} must be a non-negative integer, got '{}'",
                                      kSeedEnv, s));
    }
    cfg.seeds = {seed};
}

}  // namespace domainshift
