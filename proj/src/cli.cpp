#include "psinar/cli.hpp"

#include "psinar/analysis.hpp"
#include "psinar/estimation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace psinar::cli {

using nlohmann::json;

std::string_view to_string(Command command) noexcept {
    switch (command) {
        case Command::Simulate: return "simulate";
        case Command::Fit: return "fit";
        case Command::Compare: return "compare";
        case Command::Predict: return "predict";
        case Command::McStudy: return "mc-study";
        case Command::Describe: return "describe";
    }
    return "unknown";
}

std::string_view to_string(OutputFormat format) noexcept {
    switch (format) {
        case OutputFormat::Json: return "json";
        case OutputFormat::Csv: return "csv";
        case OutputFormat::Text: return "text";
    }
    return "unknown";
}

OutputFormat resolved_format(const RunConfig& config) noexcept {
    if (config.format) return *config.format;
    return config.command == Command::Simulate || config.command == Command::Predict
               ? OutputFormat::Csv
               : OutputFormat::Text;
}

// ---------------------------------------------------------------------------
// Ingestion

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool looks_numeric(std::string_view token) {
    if (token.empty()) return false;
    const char c = token.front();
    return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
}

Count parse_count(std::string_view token, std::size_t line) {
    if (token.empty() || token == "NA" || token == "na" || token == "NaN" || token == "nan") {
        throw InputError("missing value", line);
    }
    if (token.front() == '+') token.remove_prefix(1);
    Count value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec == std::errc() && ptr == token.data() + token.size()) {
        if (value < 0) throw InputError("negative value " + std::string(token), line);
        return value;
    }
    double real = 0.0;
    const auto [rptr, rec] = std::from_chars(token.data(), token.data() + token.size(), real);
    if (rec == std::errc() && rptr == token.data() + token.size()) {
        if (real < 0.0) throw InputError("negative value " + std::string(token), line);
        throw InputError("non-integer value " + std::string(token), line);
    }
    if (ec == std::errc::result_out_of_range) {
        throw InputError("value out of range " + std::string(token), line);
    }
    throw InputError("cannot parse '" + std::string(token) + "' as a count", line);
}

}  // namespace

CountSeries parse_series(std::istream& in) {
    std::vector<Count> values;
    std::string raw;
    std::size_t line = 0;
    std::size_t first_blank = 0;  // line of a blank line seen before more data
    bool seen_content = false;
    while (std::getline(in, raw)) {
        ++line;
        const std::string_view text = trim(raw);
        if (!text.empty() && text.front() == '#') continue;
        if (text.empty()) {
            if (seen_content && first_blank == 0) first_blank = line;
            continue;
        }
        if (first_blank != 0) throw InputError("missing value (blank line)", first_blank);
        if (!seen_content && !looks_numeric(text) && text.find(',') == std::string_view::npos &&
            text.find_first_of(" \t") == std::string_view::npos) {
            seen_content = true;  // header
            continue;
        }
        seen_content = true;
        if (text.find(',') != std::string_view::npos) {
            if (text.back() == ',' && text.find(',') == text.size() - 1) {
                values.push_back(parse_count(trim(text.substr(0, text.size() - 1)), line));
                continue;
            }
            throw InputError("expected a single column", line);
        }
        std::size_t pos = 0;
        while (pos < text.size()) {
            const auto start = text.find_first_not_of(" \t", pos);
            if (start == std::string_view::npos) break;
            auto end = text.find_first_of(" \t", start);
            if (end == std::string_view::npos) end = text.size();
            values.push_back(parse_count(text.substr(start, end - start), line));
            pos = end;
        }
    }
    if (values.size() < 3) {
        throw InputError("series has " + std::to_string(values.size()) +
                         " values; at least 3 are required");
    }
    return CountSeries(std::move(values));
}

SeriesSummary summarize(const CountSeries& series) {
    const auto n = static_cast<double>(series.size());
    double mean = 0.0;
    for (Count x : series) mean += static_cast<double>(x);
    mean /= n;
    double ss = 0.0, lag = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double d = static_cast<double>(series[i]) - mean;
        ss += d * d;
        if (i > 0) lag += d * (static_cast<double>(series[i - 1]) - mean);
    }
    std::uint64_t hash = 14695981039346656037ULL;
    for (Count x : series) {
        for (char c : std::to_string(x) + "\n") {
            hash ^= static_cast<unsigned char>(c);
            hash *= 1099511628211ULL;
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {series.size(), mean, ss / (n - 1.0), ss > 0.0 ? lag / ss : nan, hash};
}

IngestResult ingest_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input file '" + path + "'");
    CountSeries series = parse_series(in);
    SeriesSummary summary = summarize(series);
    return {std::move(series), summary};
}

// ---------------------------------------------------------------------------
// Report helpers

namespace {

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::string number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string fixed4(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

json config_json(const RunConfig& c) {
    return {
        {"command", to_string(c.command)},
        {"input", c.input_path.empty() ? json(nullptr) : json(c.input_path)},
        {"format", to_string(resolved_format(c))},
        {"family", c.family},
        {"innovation", c.innovation},
        {"alpha", optional_number(c.alpha)},
        {"theta", optional_number(c.theta)},
        {"lambda", optional_number(c.lambda)},
        {"p", optional_number(c.p)},
        {"seed", c.seed},
        {"length", c.length},
        {"burn_in", c.burn_in},
        {"replicates", c.replicates},
        {"lengths", c.lengths},
        {"method", c.method},
        {"prediction_mode", c.prediction_mode},
        {"threads", c.threads},
    };
}

json summary_json(const SeriesSummary& s) {
    return {{"length", s.length},
            {"mean", s.mean},
            {"variance", s.variance},
            {"lag1_autocorrelation", s.lag1_autocorrelation},
            {"checksum", hex64(s.checksum)}};
}

json diagnostics_json(const FitDiagnostics& d) {
    return {{"iterations", d.iterations},
            {"evaluations", d.evaluations},
            {"starts_tried", d.starts_tried},
            {"starts_converged", d.starts_converged},
            {"converged", d.converged},
            {"gradient_norm", d.gradient_norm},
            {"alpha_out_of_range", d.alpha_out_of_range},
            {"alpha_near_zero", d.alpha_near_zero},
            {"alpha_near_one", d.alpha_near_one}};
}

json std_errors_json(const FitResult& f) {
    if (!f.std_errors) return nullptr;
    return {{"alpha", f.std_errors->first},
            {std::string(parameter_name(f.innovation)), f.std_errors->second}};
}

json fit_json(const FitResult& f) {
    json j = {{"method", to_string(f.method)},
              {"alpha", f.alpha_hat},
              {std::string(parameter_name(f.innovation)), f.param_hat},
              {"loglik", f.loglik},
              {"aic", f.aic},
              {"bic", f.bic},
              {"std_errors", std_errors_json(f)},
              {"diagnostics", diagnostics_json(f.diagnostics)}};
    j["mu"] = f.mu_hat ? json(*f.mu_hat) : json(nullptr);
    return j;
}

std::string model_label(const ThinningFamily& family, InnovationKind innovation) {
    if (innovation == InnovationKind::PoissonLindley) {
        switch (family.kind()) {
            case ThinningFamily::Kind::Bernoulli: return "BINARPL";
            case ThinningFamily::Kind::Geometric: return "NBINARPL";
            case ThinningFamily::Kind::Poisson: return "PINARPL";
            default: break;
        }
    }
    if (family.kind() == ThinningFamily::Kind::Bernoulli) {
        if (innovation == InnovationKind::Poisson) return "INARP";
        if (innovation == InnovationKind::Geometric) return "INARG";
    }
    return std::string(family.name()) + "/" + std::string(to_string(innovation));
}

ThinningFamily family_from(const RunConfig& c) {
    auto family = parse_family(c.family);
    if (!family) throw ConfigError("unknown thinning family '" + c.family + "'");
    return *family;
}

InnovationKind innovation_from(const RunConfig& c) {
    auto kind = parse_innovation_kind(c.innovation);
    if (!kind) throw ConfigError("unknown innovation '" + c.innovation + "'");
    return *kind;
}

std::optional<double> innovation_parameter(const RunConfig& c, InnovationKind kind) {
    switch (kind) {
        case InnovationKind::PoissonLindley: return c.theta;
        case InnovationKind::Poisson: return c.lambda;
        case InnovationKind::Geometric: return c.p;
    }
    return std::nullopt;
}

InarModel model_from(const RunConfig& c) {
    const ThinningFamily family = family_from(c);
    const InnovationKind kind = innovation_from(c);
    if (!c.alpha) throw ConfigError("--alpha is required");
    const auto param = innovation_parameter(c, kind);
    if (!param) {
        throw ConfigError("--" + std::string(parameter_name(kind)) + " is required for " +
                          std::string(to_string(kind)) + " innovations");
    }
    try {
        return InarModel(family, *c.alpha, make_innovation(kind, *param));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::vector<Method> methods_from(const std::string& filter) {
    if (filter == "all") return {Method::Cls, Method::YuleWalker, Method::Cmle};
    std::vector<Method> methods;
    std::stringstream ss(filter);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::string lower(trim(item));
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
        if (lower == "ML" || lower == "MLE") lower = "CMLE";
        const auto m = parse_method(lower);
        if (!m) throw ConfigError("unknown estimation method '" + item + "'");
        if (std::find(methods.begin(), methods.end(), *m) == methods.end()) methods.push_back(*m);
    }
    if (methods.empty()) throw ConfigError("no estimation method selected");
    return methods;
}

const IngestResult& require_input(const RunConfig& c, std::optional<IngestResult>& slot) {
    if (c.input_path.empty()) throw ConfigError("an input file is required");
    if (!slot) slot.emplace(ingest_series(c.input_path));
    return *slot;
}

// ---------------------------------------------------------------------------
// Commands

void run_describe(const RunConfig& c, std::ostream& os, OutputFormat format) {
    std::optional<IngestResult> input;
    const SeriesSummary& s = require_input(c, input).summary;
    if (format == OutputFormat::Json) {
        os << json{{"report", "describe"}, {"config", config_json(c)}, {"summary", summary_json(s)}}
                  .dump(2)
           << '\n';
    } else if (format == OutputFormat::Csv) {
        os << "length,mean,variance,lag1_autocorrelation,checksum\n"
           << s.length << ',' << number(s.mean) << ',' << number(s.variance) << ','
           << number(s.lag1_autocorrelation) << ',' << hex64(s.checksum) << '\n';
    } else {
        os << std::fixed << std::setprecision(4) << "T          " << s.length << '\n'
           << "mean       " << s.mean << '\n'
           << "variance   " << s.variance << '\n'
           << "lag-1 ACF  " << s.lag1_autocorrelation << '\n'
           << "checksum   " << hex64(s.checksum) << '\n';
    }
}

void run_simulate(const RunConfig& c, std::ostream& os, OutputFormat format) {
    const InarModel model = model_from(c);
    if (c.length < 1) throw ConfigError("--length must be positive");
    Rng rng(c.seed);
    const std::vector<Count> xs = simulate(model, c.length, c.burn_in, rng);
    if (format == OutputFormat::Json) {
        os << json{{"report", "simulate"}, {"config", config_json(c)}, {"series", xs}}.dump(2)
           << '\n';
        return;
    }
    if (format == OutputFormat::Csv) {
        os << "# " << json{{"config", config_json(c)}}.dump() << '\n' << "x\n";
    }
    for (Count x : xs) os << x << '\n';
}

void run_fit(const RunConfig& c, std::ostream& os, OutputFormat format) {
    std::optional<IngestResult> input;
    const IngestResult& in = require_input(c, input);
    const ThinningFamily family = family_from(c);
    const InnovationKind kind = innovation_from(c);
    const std::vector<Method> methods = methods_from(c.method);

    CmleOptions options;
    if (c.alpha) {
        if (const auto param = innovation_parameter(c, kind)) options.init.emplace(*c.alpha, *param);
    }
    std::vector<FitResult> fits;
    for (Method m : methods) {
        fits.push_back(m == Method::Cmle ? fit_cmle(in.series, family, kind, options)
                                         : fit_moment(in.series, m, family, kind));
    }
    // Headline fit: CMLE when requested, otherwise the first usable one.
    const FitResult* headline = &fits.front();
    for (const auto& f : fits) {
        if (f.method == Method::Cmle) headline = &f;
    }
    const std::string label = model_label(family, kind);

    if (format == OutputFormat::Json) {
        json estimates = json::object();
        for (const auto& f : fits) estimates[std::string(to_string(f.method))] = fit_json(f);
        os << json{{"report", "fit"},
                   {"config", config_json(c)},
                   {"model", label},
                   {"summary", summary_json(in.summary)},
                   {"estimates", estimates},
                   {"headline_method", to_string(headline->method)},
                   {"loglik", headline->loglik},
                   {"aic", headline->aic},
                   {"bic", headline->bic},
                   {"std_errors", std_errors_json(*headline)},
                   {"diagnostics", diagnostics_json(headline->diagnostics)}}
                  .dump(2)
           << '\n';
        return;
    }
    const std::string pname(parameter_name(kind));
    if (format == OutputFormat::Csv) {
        os << "model,method,alpha," << pname << ",alpha_se," << pname
           << "_se,loglik,aic,bic,converged,alpha_out_of_range\n";
        for (const auto& f : fits) {
            os << label << ',' << to_string(f.method) << ',' << number(f.alpha_hat) << ','
               << number(f.param_hat) << ','
               << (f.std_errors ? number(f.std_errors->first) : "") << ','
               << (f.std_errors ? number(f.std_errors->second) : "") << ',' << number(f.loglik)
               << ',' << number(f.aic) << ',' << number(f.bic) << ','
               << (f.diagnostics.converged ? "true" : "false") << ','
               << (f.diagnostics.alpha_out_of_range ? "true" : "false") << '\n';
        }
        return;
    }
    os << label << "(1)  T=" << in.summary.length << "  seed=" << c.seed << '\n';
    os << std::left << std::setw(12) << "" << std::right;
    for (const auto& f : fits) os << std::setw(14) << to_string(f.method);
    os << '\n' << std::fixed << std::setprecision(4);
    auto row = [&](const std::string& name, auto get) {
        os << std::left << std::setw(12) << name << std::right;
        for (const auto& f : fits) os << std::setw(14) << get(f);
        os << '\n';
    };
    row("alpha", [](const FitResult& f) { return fixed4(f.alpha_hat); });
    row(pname, [](const FitResult& f) { return fixed4(f.param_hat); });
    row("se(alpha)", [](const FitResult& f) {
        return f.std_errors ? fixed4(f.std_errors->first) : std::string("-");
    });
    row("se(" + pname + ")", [](const FitResult& f) {
        return f.std_errors ? fixed4(f.std_errors->second) : std::string("-");
    });
    row("loglik", [](const FitResult& f) { return fixed4(f.loglik); });
    row("AIC", [](const FitResult& f) { return fixed4(f.aic); });
    row("BIC", [](const FitResult& f) { return fixed4(f.bic); });
}

void run_compare(const RunConfig& c, std::ostream& os, OutputFormat format) {
    std::optional<IngestResult> input;
    const IngestResult& in = require_input(c, input);
    const ComparisonTable table = compare_models(in.series);

    if (format == OutputFormat::Json) {
        json rows = json::array();
        for (const auto& r : table.rows) {
            json estimates = json::object();
            for (const auto* f : {&r.cls, &r.yw, &r.cmle}) {
                if (*f) estimates[std::string(to_string((*f)->method))] = fit_json(**f);
            }
            rows.push_back({{"model", to_string(r.model)},
                            {"estimates", estimates},
                            {"loglik", r.cmle ? json(r.cmle->loglik) : json(nullptr)},
                            {"aic", r.aic},
                            {"bic", r.bic},
                            {"std_errors", r.cmle ? std_errors_json(*r.cmle) : json(nullptr)},
                            {"diagnostics", r.cmle ? diagnostics_json(r.cmle->diagnostics)
                                                   : json(nullptr)},
                            {"error", r.error.empty() ? json(nullptr) : json(r.error)}});
        }
        os << json{{"report", "compare"},
                   {"config", config_json(c)},
                   {"summary", summary_json(in.summary)},
                   {"n_transitions", table.n_transitions},
                   {"rows", rows},
                   {"best_by_aic", to_string(*table.best_by_aic)},
                   {"best_by_bic",
                    table.best_by_bic ? json(to_string(*table.best_by_bic)) : json(nullptr)}}
                  .dump(2)
           << '\n';
        return;
    }
    if (format == OutputFormat::Csv) {
        os << "model,method,alpha,parameter,parameter_value,loglik,aic,bic\n";
        for (const auto& r : table.rows) {
            const std::string pname(parameter_name(innovation_of(r.model)));
            for (const auto* f : {&r.cls, &r.yw, &r.cmle}) {
                if (!*f) continue;
                os << to_string(r.model) << ',' << to_string((*f)->method) << ','
                   << number((*f)->alpha_hat) << ',' << pname << ',' << number((*f)->param_hat)
                   << ',' << number((*f)->loglik) << ',' << number((*f)->aic) << ','
                   << number((*f)->bic) << '\n';
            }
        }
        return;
    }
    os << "T=" << in.summary.length << "  mean=" << std::fixed << std::setprecision(2)
       << in.summary.mean << "  variance=" << in.summary.variance
       << "  lag-1 ACF=" << in.summary.lag1_autocorrelation << '\n';
    os << std::left << std::setw(12) << "Model" << std::setw(12) << "" << std::right
       << std::setw(14) << "CLS" << std::setw(14) << "YW" << std::setw(14) << "MLE"
       << std::setw(12) << "AIC" << std::setw(12) << "BIC" << '\n';
    os << std::setprecision(4);
    for (const auto& r : table.rows) {
        const std::string pname(parameter_name(innovation_of(r.model)));
        for (int line = 0; line < 2; ++line) {
            const bool alpha = line == 0;
            os << std::left << std::setw(12) << (alpha ? std::string(to_string(r.model)) + "(1)" : "")
               << std::setw(12) << (alpha ? "alpha" : pname) << std::right;
            for (const auto* f : {&r.cls, &r.yw, &r.cmle}) {
                std::ostringstream cell;
                cell << std::fixed << std::setprecision(4);
                if (*f) {
                    cell << (alpha ? (*f)->alpha_hat : (*f)->param_hat);
                } else {
                    cell << "-";
                }
                os << std::setw(14) << cell.str();
            }
            if (alpha) {
                os << std::setprecision(2) << std::setw(12) << r.aic << std::setw(12) << r.bic
                   << std::setprecision(4);
            }
            os << '\n';
        }
        if (r.cmle && r.cmle->std_errors) {
            os << std::left << std::setw(12) << "" << std::setw(12) << "se (MLE)" << std::right
               << std::setw(42) << "(" + fixed4(r.cmle->std_errors->first) + ", " +
                                       fixed4(r.cmle->std_errors->second) + ")"
               << '\n';
        }
        if (!r.error.empty()) os << "  note: " << r.error << '\n';
    }
    os << "best by AIC: " << to_string(*table.best_by_aic);
    if (table.best_by_bic) os << "   best by BIC: " << to_string(*table.best_by_bic);
    os << '\n';
}

void run_predict(const RunConfig& c, std::ostream& os, OutputFormat format) {
    std::optional<IngestResult> input;
    const IngestResult& in = require_input(c, input);
    const ThinningFamily family = family_from(c);
    const InnovationKind kind = innovation_from(c);
    PredictionMode mode;
    if (c.prediction_mode == "observed") {
        mode = PredictionMode::ObservedLag;
    } else if (c.prediction_mode == "predicted") {
        mode = PredictionMode::PredictedLag;
    } else {
        throw ConfigError("unknown prediction mode '" + c.prediction_mode + "'");
    }

    double alpha = 0.0;
    double innovation_mean = 0.0;
    std::string source;
    const auto param = innovation_parameter(c, kind);
    if (c.alpha && param) {
        try {
            require_alpha(*c.alpha);
            alpha = *c.alpha;
            innovation_mean = innovation_moments(make_innovation(kind, *param)).mean;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        source = "given";
    } else {
        std::vector<Method> methods = methods_from(c.method == "all" ? "cmle" : c.method);
        if (methods.size() != 1) throw ConfigError("predict takes a single estimation method");
        const FitResult fit = methods.front() == Method::Cmle
                                  ? fit_cmle(in.series, family, kind)
                                  : fit_moment(in.series, methods.front(), family, kind);
        if (!fit.usable()) {
            throw EstimationError(std::string(to_string(fit.method)) +
                                      " estimate of alpha is outside (0, 1)",
                                  fit.diagnostics);
        }
        alpha = fit.alpha_hat;
        innovation_mean = innovation_moments(make_innovation(kind, fit.param_hat)).mean;
        source = std::string(to_string(fit.method));
    }
    const PredictionTrace trace = predict(in.series, alpha, innovation_mean, mode);

    if (format == OutputFormat::Json) {
        os << json{{"report", "predict"},
                   {"config", config_json(c)},
                   {"model", model_label(family, kind)},
                   {"parameter_source", source},
                   {"alpha", alpha},
                   {"innovation_mean", innovation_mean},
                   {"observed", trace.observed},
                   {"predicted", trace.predicted},
                   {"residuals", trace.residuals}}
                  .dump(2)
           << '\n';
        return;
    }
    os << "t,observed,predicted,residual\n";
    for (std::size_t i = 0; i < trace.observed.size(); ++i) {
        os << (i + 1) << ',' << trace.observed[i] << ',' << number(trace.predicted[i]) << ','
           << number(trace.residuals[i]) << '\n';
    }
}

void run_mc_study_command(const RunConfig& c, std::ostream& os, OutputFormat format) {
    McConfig mc;
    mc.family = family_from(c);
    if (innovation_from(c) != InnovationKind::PoissonLindley) {
        throw ConfigError("mc-study simulates Poisson-Lindley innovations only");
    }
    if (!c.alpha || !c.theta) throw ConfigError("--alpha and --theta are required");
    try {
        require_alpha(*c.alpha);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(*c.theta > 0.0)) throw ConfigError("theta must be positive");
    if (c.replicates == 0) throw ConfigError("--replicates must be positive");
    if (c.lengths.empty()) throw ConfigError("--lengths must not be empty");
    for (std::size_t len : c.lengths) {
        if (len < 3) throw ConfigError("series lengths must be at least 3");
    }
    mc.alpha = *c.alpha;
    mc.theta = *c.theta;
    mc.lengths = c.lengths;
    mc.replicates = c.replicates;
    mc.seed = c.seed;
    mc.burn_in = c.burn_in;
    mc.threads = c.threads;
    mc.methods = methods_from(c.method);
    const McReport report = run_mc_study(mc);

    if (format == OutputFormat::Json) {
        json cells = json::array();
        for (const auto& cell : report.cells) {
            cells.push_back({{"length", cell.length},
                             {"method", to_string(cell.method)},
                             {"parameter", cell.parameter},
                             {"truth", cell.truth},
                             {"ae", cell.ae},
                             {"abias", cell.abias},
                             {"rmse", cell.rmse},
                             {"sd", cell.sd},
                             {"replicates", cell.replicates},
                             {"failures", cell.failures},
                             {"mean_std_error", optional_number(cell.mean_std_error)}});
        }
        os << json{{"report", "mc-study"},
                   {"config", config_json(c)},
                   {"model", model_label(mc.family, InnovationKind::PoissonLindley)},
                   {"cells", cells}}
                  .dump(2)
           << '\n';
        return;
    }
    if (format == OutputFormat::Csv) {
        os << "length,method,parameter,truth,ae,abias,rmse,sd,replicates,failures,mean_std_error\n";
        for (const auto& cell : report.cells) {
            os << cell.length << ',' << to_string(cell.method) << ',' << cell.parameter << ','
               << number(cell.truth) << ',' << number(cell.ae) << ',' << number(cell.abias) << ','
               << number(cell.rmse) << ',' << number(cell.sd) << ',' << cell.replicates << ','
               << cell.failures << ','
               << (cell.mean_std_error ? number(*cell.mean_std_error) : "") << '\n';
        }
        return;
    }
    os << model_label(mc.family, InnovationKind::PoissonLindley) << "(1)  alpha=" << number(mc.alpha)
       << "  theta=" << number(mc.theta) << "  replicates=" << mc.replicates
       << "  seed=" << mc.seed << '\n';
    os << std::left << std::setw(6) << "T" << std::setw(8) << "" << std::right;
    for (Method m : mc.methods) {
        const std::string tag = m == Method::Cmle ? "ML" : std::string(to_string(m));
        os << std::setw(11) << "alpha_" + tag << std::setw(11) << "theta_" + tag;
    }
    os << '\n' << std::fixed << std::setprecision(4);
    for (std::size_t len : mc.lengths) {
        const char* stats[] = {"AEs", "ABias", "RMSE"};
        for (int s = 0; s < 3; ++s) {
            os << std::left << std::setw(6) << (s == 0 ? std::to_string(len) : "") << std::setw(8)
               << stats[s] << std::right;
            for (Method m : mc.methods) {
                for (const char* p : {"alpha", "theta"}) {
                    const McCell& cell = report.cell(len, m, p);
                    const double v = s == 0 ? cell.ae : s == 1 ? cell.abias : cell.rmse;
                    os << std::setw(11) << v;
                }
            }
            os << '\n';
        }
        std::size_t failures = 0;
        for (Method m : mc.methods) failures += report.cell(len, m, "alpha").failures;
        if (failures > 0) {
            os << std::left << std::setw(6) << "" << "failures:";
            for (Method m : mc.methods) {
                os << ' ' << to_string(m) << '=' << report.cell(len, m, "alpha").failures;
            }
            os << std::right << '\n';
        }
    }
}

void emit_error(std::ostream& err, int code, std::string_view kind, const std::string& message,
                std::size_t line = 0) {
    json record = {{"exit_code", code}, {"kind", kind}, {"message", message}};
    if (line > 0) record["line"] = line;
    err << json{{"error", record}}.dump() << '\n';
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        const OutputFormat format = resolved_format(config);
        std::ostringstream buffer;
        switch (config.command) {
            case Command::Describe: run_describe(config, buffer, format); break;
            case Command::Simulate: run_simulate(config, buffer, format); break;
            case Command::Fit: run_fit(config, buffer, format); break;
            case Command::Compare: run_compare(config, buffer, format); break;
            case Command::Predict: run_predict(config, buffer, format); break;
            case Command::McStudy: run_mc_study_command(config, buffer, format); break;
        }
        if (config.output_path.empty()) {
            out << buffer.str();
            out.flush();
        } else {
            std::ofstream file(config.output_path);
            if (!file || !(file << buffer.str())) {
                throw ConfigError("cannot write output file '" + config.output_path + "'");
            }
        }
        return kSuccess;
    } catch (const InputError& e) {
        emit_error(err, kInputError, "input", e.what(), e.line());
        return kInputError;
    } catch (const ConfigError& e) {
        emit_error(err, kConfigurationError, "configuration", e.what());
        return kConfigurationError;
    } catch (const EstimationError& e) {
        emit_error(err, kEstimationFailure, "estimation", e.what());
        return kEstimationFailure;
    } catch (const DegenerateSeriesError& e) {
        emit_error(err, kEstimationFailure, "estimation", e.what());
        return kEstimationFailure;
    } catch (const ConvergenceError& e) {
        emit_error(err, kEstimationFailure, "estimation", e.what());
        return kEstimationFailure;
    } catch (const std::invalid_argument& e) {
        emit_error(err, kConfigurationError, "configuration", e.what());
        return kConfigurationError;
    } catch (const std::exception& e) {
        emit_error(err, kEstimationFailure, "estimation", e.what());
        return kEstimationFailure;
    }
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct OptionSlots {
    double alpha = 0, theta = 0, lambda = 0, p = 0;
    std::string format;
};

void add_model_options(CLI::App& sub, RunConfig& c, OptionSlots& slots, bool with_params) {
    sub.add_option("--family", c.family, "thinning family: bernoulli, geometric, poisson")
        ->capture_default_str();
    sub.add_option("--innovation", c.innovation, "innovation law: pl, poisson, geometric")
        ->capture_default_str();
    if (!with_params) return;
    sub.add_option("--alpha", slots.alpha, "thinning mean alpha in (0, 1)");
    sub.add_option("--theta", slots.theta, "Poisson-Lindley theta");
    sub.add_option("--lambda", slots.lambda, "Poisson innovation mean");
    sub.add_option("--p", slots.p, "geometric innovation success probability");
}

void add_common_options(CLI::App& sub, RunConfig& c, OptionSlots& slots, bool needs_input) {
    if (needs_input) sub.add_option("input", c.input_path, "count series file")->required();
    sub.add_option("-o,--output", c.output_path, "output file (default: standard output)");
    sub.add_option("--format", slots.format, "json, csv or text")
        ->check(CLI::IsMember({"json", "csv", "text"}));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Power-series thinning INAR(1) models with Poisson-Lindley innovations", "psinar"};
    app.require_subcommand(1);
    RunConfig c;
    OptionSlots slots;

    auto* sim = app.add_subcommand("simulate", "simulate a series");
    add_common_options(*sim, c, slots, false);
    add_model_options(*sim, c, slots, true);
    sim->add_option("--length", c.length, "series length T")->capture_default_str();
    sim->add_option("--burn-in", c.burn_in, "discarded initial steps")->capture_default_str();
    sim->add_option("--seed", c.seed, "random seed")->capture_default_str();

    auto* fit = app.add_subcommand("fit", "estimate a model by CLS, YW and CMLE");
    add_common_options(*fit, c, slots, true);
    add_model_options(*fit, c, slots, true);
    fit->add_option("--method", c.method, "all, or a comma list of cls, yw, cmle")
        ->capture_default_str();

    auto* cmp = app.add_subcommand("compare", "fit and rank the five candidate models");
    add_common_options(*cmp, c, slots, true);

    auto* pred = app.add_subcommand("predict", "one-step-ahead predictions and residuals");
    add_common_options(*pred, c, slots, true);
    add_model_options(*pred, c, slots, true);
    pred->add_option("--method", c.method, "estimator used when parameters are not given");
    pred->add_option("--mode", c.prediction_mode, "observed or predicted lag")
        ->check(CLI::IsMember({"observed", "predicted"}))
        ->capture_default_str();

    auto* mc = app.add_subcommand("mc-study", "Monte Carlo study of the estimators");
    add_common_options(*mc, c, slots, false);
    add_model_options(*mc, c, slots, true);
    mc->add_option("--lengths", c.lengths, "series lengths")->delimiter(',')->capture_default_str();
    mc->add_option("--replicates", c.replicates, "replicates per length")->capture_default_str();
    mc->add_option("--burn-in", c.burn_in, "discarded initial steps")->capture_default_str();
    mc->add_option("--seed", c.seed, "master seed")->capture_default_str();
    mc->add_option("--threads", c.threads, "worker threads, 0 for all cores")
        ->capture_default_str();
    mc->add_option("--method", c.method, "all, or a comma list of cls, yw, cmle")
        ->capture_default_str();

    auto* desc = app.add_subcommand("describe", "summary statistics and checksum of a series");
    add_common_options(*desc, c, slots, true);

    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        emit_error(err, kConfigurationError, "configuration", e.what());
        return kConfigurationError;
    }

    const std::pair<CLI::App*, Command> table[] = {
        {sim, Command::Simulate}, {fit, Command::Fit},      {cmp, Command::Compare},
        {pred, Command::Predict}, {mc, Command::McStudy},   {desc, Command::Describe}};
    for (const auto& [sub, command] : table) {
        if (!sub->parsed()) continue;
        c.command = command;
        auto set = [sub](const char* name, double value, std::optional<double>& slot) {
            if (sub->get_option_no_throw(name) && sub->count(name) > 0) slot = value;
        };
        set("--alpha", slots.alpha, c.alpha);
        set("--theta", slots.theta, c.theta);
        set("--lambda", slots.lambda, c.lambda);
        set("--p", slots.p, c.p);
    }
    if (slots.format == "json") c.format = OutputFormat::Json;
    if (slots.format == "csv") c.format = OutputFormat::Csv;
    if (slots.format == "text") c.format = OutputFormat::Text;
    return run(c, out, err);
}

}  // namespace psinar::cli
