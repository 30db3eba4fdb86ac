#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <qic/channel_io.hpp>
#include <qic/channels.hpp>
#include <qic/conditions.hpp>
#include <qic/entropy.hpp>
#include <qic/errors.hpp>
#include <qic/geometry.hpp>
#include <qic/regions.hpp>
#include <qic/simdec.hpp>
#include <qic/version.hpp>

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string fmt_num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct CsvFile {
    std::string path;
    std::string header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    void add_nums(std::initializer_list<double> vals) {
        std::vector<std::string> row;
        for (double v : vals) row.push_back(fmt_num(v));
        rows.push_back(std::move(row));
    }
};

void write_csv(const CsvFile& csv) {
    std::ofstream out(csv.path, std::ios::binary);
    if (!out) throw qic::input_error("cannot open output file: " + csv.path);
    out << csv.header << "\n";
    for (const auto& row : csv.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            out << row[i];
        }
        out << "\n";
    }
    if (!out) throw qic::input_error("write failed: " + csv.path);
}

// Every emitted file gets a sibling manifest recording how to regenerate it.
struct RunContext {
    std::string command_line;
    json params = json::object();
    std::uint64_t seed = 0;
    Clock::time_point start = Clock::now();

    json manifest() const {
        double wall = std::chrono::duration<double>(Clock::now() - start).count();
        json m;
        m["command"] = command_line;
        m["parameters"] = params;
        m["seed"] = seed;
        m["version"] = qic::version();
        m["wall_time_s"] = wall;
        return m;
    }

    void write_for(const std::string& artifact_path, const json& extra = json()) const {
        json m = manifest();
        if (!extra.is_null()) m["report"] = extra;
        std::ofstream out(artifact_path + ".manifest.json", std::ios::binary);
        if (!out) throw qic::input_error("cannot open manifest for: " + artifact_path);
        out << m.dump(2) << "\n";
    }
};

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += " ";
        s += argv[i];
    }
    return s;
}

std::vector<double> parse_dist(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) throw qic::input_error("empty entry in distribution list");
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &pos);
        } catch (const std::exception&) {
            throw qic::input_error("bad number in distribution list: " + tok);
        }
        if (pos != tok.size()) throw qic::input_error("bad number in distribution list: " + tok);
        out.push_back(v);
    }
    if (out.empty()) throw qic::input_error("empty distribution list");
    double sum = 0.0;
    for (double v : out) {
        if (v < 0.0) throw qic::input_error("negative probability in distribution list");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw qic::input_error("distribution does not sum to 1");
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t pos = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &pos);
        } catch (const std::exception&) {
            throw qic::input_error("bad integer in list: " + tok);
        }
        if (pos != tok.size()) throw qic::input_error("bad integer in list: " + tok);
        out.push_back(v);
    }
    if (out.empty()) throw qic::input_error("empty integer list");
    return out;
}

// --channel <file> or --builtin theta-swap:<radians>|bb84
struct ChannelArgs {
    std::string file;
    std::string builtin;

    void attach(CLI::App* cmd) {
        cmd->add_option("--channel", file, "channel JSON file");
        cmd->add_option("--builtin", builtin, "builtin channel: theta-swap:<radians> or bb84");
    }

    qic::Channel resolve() const {
        if (file.empty() == builtin.empty())
            throw qic::input_error("exactly one of --channel or --builtin is required");
        if (!file.empty()) return qic::load_channel(file);
        if (builtin == "bb84") return qic::bb84_cccq();
        const std::string prefix = "theta-swap:";
        if (builtin.rfind(prefix, 0) == 0) {
            std::string arg = builtin.substr(prefix.size());
            std::size_t pos = 0;
            double theta = 0.0;
            try {
                theta = std::stod(arg, &pos);
            } catch (const std::exception&) {
                throw qic::input_error("bad theta in builtin spec: " + builtin);
            }
            if (pos != arg.size()) throw qic::input_error("bad theta in builtin spec: " + builtin);
            return qic::theta_swap(theta);
        }
        throw qic::input_error("unknown builtin channel: " + builtin);
    }
};

struct DistArgs {
    bool uniform = false;
    std::string d1, d2, d3;

    void attach(CLI::App* cmd) {
        cmd->add_flag("--uniform", uniform, "uniform input distributions (default)");
        cmd->add_option("--dist1", d1, "first input distribution, comma separated");
        cmd->add_option("--dist2", d2, "second input distribution, comma separated");
        cmd->add_option("--dist3", d3, "third input distribution, comma separated");
    }

    static std::vector<double> uniform_dist(int n) {
        return std::vector<double>(n, 1.0 / n);
    }

    std::vector<double> get(int which, int arity) const {
        const std::string* s = which == 0 ? &d1 : which == 1 ? &d2 : &d3;
        if (s->empty()) return uniform_dist(arity);
        std::vector<double> p = parse_dist(*s);
        if (static_cast<int>(p.size()) != arity)
            throw qic::input_error("distribution arity mismatch: expected " + std::to_string(arity));
        return p;
    }
};

struct SamplerArgs {
    std::string mode = "grid";
    double step = 0.05;
    int count = 200;
    std::uint64_t seed = 1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--dist-mode", mode, "distribution sampler: grid or random")
            ->check(CLI::IsMember({"grid", "random"}));
        cmd->add_option("--dist-step", step, "simplex grid step (grid mode)");
        cmd->add_option("--dist-count", count, "sample count (random mode)");
        cmd->add_option("--dist-seed", seed, "sampler seed (random mode)");
    }

    qic::DistSampler build() const {
        if (mode == "random") return qic::DistSampler::random_sampler(count, seed);
        return qic::DistSampler::grid_sampler(step);
    }

    json to_json() const {
        return json{{"mode", mode}, {"step", step}, {"count", count}, {"seed", seed}};
    }
};

const qic::CcqqChannel& expect_ccqq(const qic::Channel& ch) {
    if (!std::holds_alternative<qic::CcqqChannel>(ch))
        throw qic::input_error("this command needs a two-sender two-receiver channel");
    return std::get<qic::CcqqChannel>(ch);
}

const qic::CcqMac& expect_mac(const qic::Channel& ch, int senders) {
    if (!std::holds_alternative<qic::CcqMac>(ch))
        throw qic::input_error("this command needs a multiple-access channel");
    const auto& mac = std::get<qic::CcqMac>(ch);
    if (senders > 0 && mac.senders() != senders)
        throw qic::input_error("MAC must have " + std::to_string(senders) + " senders");
    return mac;
}

void emit_region_csv(const std::string& path, const qic::RateRegion2D& reg) {
    CsvFile csv;
    csv.path = path;
    csv.header = "R1,R2";
    if (!reg.empty)
        for (const auto& pt : reg.frontier) csv.add_nums({pt[0], pt[1]});
    write_csv(csv);
}

void emit_system_csv(const std::string& path, const qic::HalfspaceSystem& sys) {
    CsvFile csv;
    csv.path = path;
    std::string header;
    for (const auto& v : sys.vars) header += "coef_" + v + ",";
    header += "rhs";
    csv.header = header;
    for (const auto& row : sys.rows) {
        std::vector<std::string> cells;
        for (double a : row.a) cells.push_back(fmt_num(a));
        cells.push_back(fmt_num(row.b));
        csv.add(std::move(cells));
    }
    write_csv(csv);
}

double max_sum_rate(const qic::RateRegion2D& reg) {
    if (reg.empty) return 0.0;
    double best = 0.0;
    for (const auto& pt : reg.frontier) best = std::max(best, pt[0] + pt[1]);
    return best;
}

json report_to_json(const qic::ConditionReport& rep) {
    json j;
    j["holds"] = rep.holds;
    j["min_slack"] = rep.min_slack;
    j["argmin_p1"] = rep.argmin_p1;
    j["argmin_p2"] = rep.argmin_p2;
    j["grid_step"] = rep.grid_step;
    j["refined"] = rep.refined;
    j["method"] = rep.method;
    return j;
}

void emit_json(const json& j, const std::string& out_path, const RunContext& ctx) {
    json full = j;
    full["manifest"] = ctx.manifest();
    std::string text = full.dump(2) + "\n";
    std::cout << text;
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw qic::input_error("cannot open output file: " + out_path);
        out << text;
    }
}

// --- entropy command ---

json entropy_report_ccqq(const qic::CcqqChannel& ch, const std::vector<double>& p1,
                         const std::vector<double>& p2) {
    qic::detail::MarginalCache cache(ch);
    auto e = cache.evaluate(p1, p2);
    json j;
    j["H(B1)"] = e.b1;
    j["H(B2)"] = e.b2;
    j["H(B1|X1)"] = e.b1_x1;
    j["H(B1|X2)"] = e.b1_x2;
    j["H(B2|X1)"] = e.b2_x1;
    j["H(B2|X2)"] = e.b2_x2;
    j["H(B1|X1X2)"] = e.b1_x1x2;
    j["H(B2|X1X2)"] = e.b2_x1x2;
    j["I(X1;B1)"] = e.b1 - e.b1_x1;
    j["I(X2;B1)"] = e.b1 - e.b1_x2;
    j["I(X1;B2)"] = e.b2 - e.b2_x1;
    j["I(X2;B2)"] = e.b2 - e.b2_x2;
    j["I(X1;B1|X2)"] = e.b1_x2 - e.b1_x1x2;
    j["I(X2;B1|X1)"] = e.b1_x1 - e.b1_x1x2;
    j["I(X1;B2|X2)"] = e.b2_x2 - e.b2_x1x2;
    j["I(X2;B2|X1)"] = e.b2_x1 - e.b2_x1x2;
    j["I(X1X2;B1)"] = e.b1 - e.b1_x1x2;
    j["I(X1X2;B2)"] = e.b2 - e.b2_x1x2;

    // Joint-output informations for the Sato bound.
    std::vector<qic::Mat> states(ch.states().begin(), ch.states().end());
    qic::CqEnsemble joint({{"X1", p1}, {"X2", p2}}, std::move(states));
    j["I(X1X2;B1B2)"] = qic::mutual_info(joint, {"X1", "X2"}, {});

    for (int r = 1; r <= 2; ++r) {
        qic::CcqMac mac = qic::induced_mac(ch, r);
        std::vector<qic::Mat> ms(mac.states().begin(), mac.states().end());
        qic::CqEnsemble ens({{"X1", p1}, {"X2", p2}}, std::move(ms));
        std::string b = r == 1 ? "B1" : "B2";
        j["Hmin(" + b + ")"] = qic::cond_min_entropy(ens, {});
        j["Hmin(" + b + "|X1X2)"] = qic::cond_min_entropy(ens, {"X1", "X2"});
    }
    return j;
}

json entropy_report_mac2(const qic::CcqMac& mac, const std::vector<double>& px,
                         const std::vector<double>& py) {
    qic::CqEnsemble e = qic::mac2_ensemble(mac, px, py);
    json j;
    j["H(B)"] = qic::cond_entropy(e, {});
    j["H(B|X)"] = qic::cond_entropy(e, {"X"});
    j["H(B|Y)"] = qic::cond_entropy(e, {"Y"});
    j["H(B|XY)"] = qic::cond_entropy(e, {"X", "Y"});
    j["I(X;B)"] = qic::mutual_info(e, {"X"}, {});
    j["I(Y;B)"] = qic::mutual_info(e, {"Y"}, {});
    j["I(X;B|Y)"] = qic::mutual_info(e, {"X"}, {"Y"});
    j["I(Y;B|X)"] = qic::mutual_info(e, {"Y"}, {"X"});
    j["I(XY;B)"] = qic::mutual_info(e, {"X", "Y"}, {});
    j["Hmin(B)"] = qic::cond_min_entropy(e, {});
    j["Hmin(B|X)"] = qic::cond_min_entropy(e, {"X"});
    j["Hmin(B|Y)"] = qic::cond_min_entropy(e, {"Y"});
    j["Hmin(B|XY)"] = qic::cond_min_entropy(e, {"X", "Y"});
    return j;
}

json entropy_report_mac3(const qic::CcqMac& mac, const std::vector<double>& px,
                         const std::vector<double>& py, const std::vector<double>& pz) {
    qic::CqEnsemble e = qic::mac3_ensemble(mac, px, py, pz);
    json j;
    j["H(B)"] = qic::cond_entropy(e, {});
    j["H(B|X)"] = qic::cond_entropy(e, {"X"});
    j["H(B|Y)"] = qic::cond_entropy(e, {"Y"});
    j["H(B|Z)"] = qic::cond_entropy(e, {"Z"});
    j["H(B|XY)"] = qic::cond_entropy(e, {"X", "Y"});
    j["H(B|XZ)"] = qic::cond_entropy(e, {"X", "Z"});
    j["H(B|YZ)"] = qic::cond_entropy(e, {"Y", "Z"});
    j["H(B|XYZ)"] = qic::cond_entropy(e, {"X", "Y", "Z"});
    j["I(X;B|YZ)"] = qic::mutual_info(e, {"X"}, {"Y", "Z"});
    j["I(Y;B|XZ)"] = qic::mutual_info(e, {"Y"}, {"X", "Z"});
    j["I(Z;B|XY)"] = qic::mutual_info(e, {"Z"}, {"X", "Y"});
    j["I(XY;B|Z)"] = qic::mutual_info(e, {"X", "Y"}, {"Z"});
    j["I(XZ;B|Y)"] = qic::mutual_info(e, {"X", "Z"}, {"Y"});
    j["I(YZ;B|X)"] = qic::mutual_info(e, {"Y", "Z"}, {"X"});
    j["I(XYZ;B)"] = qic::mutual_info(e, {"X", "Y", "Z"}, {});
    j["Hmin(B)"] = qic::cond_min_entropy(e, {});
    j["Hmin(B|X)"] = qic::cond_min_entropy(e, {"X"});
    j["Hmin(B|Y)"] = qic::cond_min_entropy(e, {"Y"});
    j["Hmin(B|Z)"] = qic::cond_min_entropy(e, {"Z"});
    j["Hmin(B|XY)"] = qic::cond_min_entropy(e, {"X", "Y"});
    j["Hmin(B|XZ)"] = qic::cond_min_entropy(e, {"X", "Z"});
    j["Hmin(B|YZ)"] = qic::cond_min_entropy(e, {"Y", "Z"});
    j["Hmin(B|XYZ)"] = qic::cond_min_entropy(e, {"X", "Y", "Z"});
    return j;
}

int cmd_entropy(const ChannelArgs& chan, const DistArgs& dists, const std::string& out_path,
                RunContext& ctx) {
    qic::Channel ch = chan.resolve();
    json j;
    if (std::holds_alternative<qic::CcqqChannel>(ch)) {
        const auto& c = std::get<qic::CcqqChannel>(ch);
        auto p1 = dists.get(0, c.alphabets()[0]);
        auto p2 = dists.get(1, c.alphabets()[1]);
        ctx.params["dist1"] = p1;
        ctx.params["dist2"] = p2;
        j = entropy_report_ccqq(c, p1, p2);
    } else {
        const auto& mac = std::get<qic::CcqMac>(ch);
        if (mac.senders() == 2) {
            auto px = dists.get(0, mac.alphabets()[0]);
            auto py = dists.get(1, mac.alphabets()[1]);
            ctx.params["dist1"] = px;
            ctx.params["dist2"] = py;
            j = entropy_report_mac2(mac, px, py);
        } else if (mac.senders() == 3) {
            auto px = dists.get(0, mac.alphabets()[0]);
            auto py = dists.get(1, mac.alphabets()[1]);
            auto pz = dists.get(2, mac.alphabets()[2]);
            ctx.params["dist1"] = px;
            ctx.params["dist2"] = py;
            ctx.params["dist3"] = pz;
            j = entropy_report_mac3(mac, px, py, pz);
        } else {
            throw qic::input_error("entropy: unsupported sender count");
        }
    }
    emit_json(j, out_path, ctx);
    if (!out_path.empty()) ctx.write_for(out_path);
    return 0;
}

// --- check-interference command ---

int cmd_check_interference(const ChannelArgs& chan, const std::string& mode, double grid_step,
                           std::uint64_t seed, const std::string& out_path, RunContext& ctx) {
    qic::Channel chv = chan.resolve();
    const auto& ch = expect_ccqq(chv);
    qic::ConditionReport rep;
    if (mode == "very-strong")
        rep = qic::check_very_strong(ch, grid_step, seed);
    else if (mode == "strong")
        rep = qic::check_strong(ch, grid_step, seed);
    else
        throw qic::input_error("unknown mode: " + mode);
    emit_json(report_to_json(rep), out_path, ctx);
    if (!out_path.empty()) ctx.write_for(out_path);
    return 0;
}

// --- region command ---

struct RegionArgs {
    std::string method;
    std::string out;
    int receiver = 1;
    std::string perm = "0,1,2";
    int hk_count = 0;
    std::uint64_t hk_seed = 99;
    double cond_step = 0.02;
    double snr1 = 0.0, snr2 = 0.0, inr1 = 0.0, inr2 = 0.0;
    double split_step = 0.05;
};

qic::CcqMac mac_for_region(const qic::Channel& ch, int receiver) {
    if (std::holds_alternative<qic::CcqMac>(ch)) return std::get<qic::CcqMac>(ch);
    return qic::induced_mac(std::get<qic::CcqqChannel>(ch), receiver);
}

int cmd_region(const ChannelArgs& chan, const DistArgs& dists, const SamplerArgs& sampler,
               const RegionArgs& args, RunContext& ctx) {
    const std::string& m = args.method;
    ctx.params["method"] = m;

    if (m == "gauss-sd-rs" || m == "gauss-hk") {
        qic::GaussianIc ic{args.snr1, args.snr2, args.inr1, args.inr2};
        auto splits = qic::gauss_split_grid(args.split_step);
        ctx.params["snr1"] = ic.snr1;
        ctx.params["snr2"] = ic.snr2;
        ctx.params["inr1"] = ic.inr1;
        ctx.params["inr2"] = ic.inr2;
        ctx.params["split_step"] = args.split_step;
        if (m == "gauss-hk") {
            emit_region_csv(args.out, qic::gaussian_hk(ic, splits));
        } else {
            auto pts = qic::gaussian_sd_rs(ic, splits);
            CsvFile csv;
            csv.path = args.out;
            csv.header = "lambda1,lambda2,R1,R2";
            for (std::size_t i = 0; i < pts.size(); ++i)
                csv.add_nums({splits[i].l1, splits[i].l2, pts[i].r1, pts[i].r2});
            write_csv(csv);
        }
        ctx.write_for(args.out);
        return 0;
    }

    qic::Channel ch = chan.resolve();

    if (m == "mac2") {
        const auto& mac = mac_for_region(ch, args.receiver);
        if (mac.senders() != 2) throw qic::input_error("mac2 region needs a two-sender MAC");
        auto px = dists.get(0, mac.alphabets()[0]);
        auto py = dists.get(1, mac.alphabets()[1]);
        ctx.params["dist1"] = px;
        ctx.params["dist2"] = py;
        emit_system_csv(args.out, qic::mac2_system(mac, px, py));
        ctx.write_for(args.out);
        return 0;
    }
    if (m == "mac3" || m == "min-entropy") {
        const auto& mac = expect_mac(ch, 3);
        auto px = dists.get(0, mac.alphabets()[0]);
        auto py = dists.get(1, mac.alphabets()[1]);
        auto pz = dists.get(2, mac.alphabets()[2]);
        ctx.params["dist1"] = px;
        ctx.params["dist2"] = py;
        ctx.params["dist3"] = pz;
        if (m == "mac3") {
            emit_system_csv(args.out, qic::mac3_system(mac, px, py, pz));
        } else {
            std::vector<int> perm = parse_int_list(args.perm);
            ctx.params["perm"] = perm;
            emit_system_csv(args.out, qic::minentropy3_system(mac, px, py, pz, perm));
        }
        ctx.write_for(args.out);
        return 0;
    }
    if (m == "sd-points") {
        const auto& c = expect_ccqq(ch);
        auto p1 = dists.get(0, c.alphabets()[0]);
        auto p2 = dists.get(1, c.alphabets()[1]);
        ctx.params["dist1"] = p1;
        ctx.params["dist2"] = p2;
        auto pts = qic::sd_points(c, p1, p2);
        CsvFile csv;
        csv.path = args.out;
        csv.header = "label,R1,R2";
        for (std::size_t i = 0; i < pts.size(); ++i)
            csv.add({"P" + std::to_string(i + 1), fmt_num(pts[i].r1), fmt_num(pts[i].r2)});
        write_csv(csv);
        ctx.write_for(args.out);
        return 0;
    }

    const auto& c = expect_ccqq(ch);
    qic::DistSampler ds = sampler.build();
    ctx.params["sampler"] = sampler.to_json();
    if (m == "sim-inner") {
        emit_region_csv(args.out, qic::sim_inner_bound(c, ds));
    } else if (m == "vsi" || m == "strong") {
        ctx.params["cond_step"] = args.cond_step;
        qic::ConditionReport rep = m == "vsi" ? qic::check_very_strong(c, args.cond_step)
                                              : qic::check_strong(c, args.cond_step);
        if (!rep.holds) {
            std::cerr << "interference condition fails; report:\n"
                      << report_to_json(rep).dump(2) << "\n";
            throw qic::input_error("channel does not satisfy the required interference condition");
        }
        qic::RateRegion2D reg = m == "vsi" ? qic::vsi_capacity(c, ds, &rep)
                                           : qic::strong_capacity(c, ds, &rep);
        emit_region_csv(args.out, reg);
        ctx.write_for(args.out, report_to_json(rep));
        return 0;
    } else if (m == "hk") {
        std::vector<qic::HkInput> inputs;
        for (const auto& [p1, p2] : ds.sample(c.alphabets()[0], c.alphabets()[1]))
            for (auto& hk : qic::hk_canonical_inputs(p1, p2)) inputs.push_back(std::move(hk));
        if (args.hk_count > 0) {
            ctx.params["hk_count"] = args.hk_count;
            ctx.params["hk_seed"] = args.hk_seed;
            for (auto& hk : qic::hk_random_inputs(c, args.hk_count, args.hk_seed))
                inputs.push_back(std::move(hk));
        }
        emit_region_csv(args.out, qic::hk_hull(c, inputs));
    } else if (m == "sato") {
        emit_region_csv(args.out, qic::sato_outer(c, ds));
    } else {
        throw qic::input_error("unknown region method: " + m);
    }
    ctx.write_for(args.out);
    return 0;
}

// --- sweep-theta command ---

int cmd_sweep_theta(double from, double to, double step, const std::string& mode,
                    const SamplerArgs& sampler, double cond_step, const std::string& out_dir,
                    RunContext& ctx) {
    if (step <= 0.0) throw qic::input_error("sweep-theta: step must be positive");
    if (to < from) throw qic::input_error("sweep-theta: empty range");
    std::filesystem::create_directories(out_dir);
    qic::DistSampler ds = sampler.build();
    ctx.params["sampler"] = sampler.to_json();
    ctx.params["cond_step"] = cond_step;
    ctx.params["mode"] = mode;

    CsvFile summary;
    summary.path = out_dir + "/summary.csv";
    summary.header = "theta,holds,max_r1,max_r2,max_sum";
    int steps = static_cast<int>(std::floor((to - from) / step + 1e-9));
    for (int k = 0; k <= steps; ++k) {
        double theta = from + k * step;
        qic::CcqqChannel ch = qic::theta_swap(theta);
        qic::ConditionReport rep = mode == "strong" ? qic::check_strong(ch, cond_step)
                                                    : qic::check_very_strong(ch, cond_step);
        if (!rep.holds) {
            summary.add({fmt_num(theta), "0", "nan", "nan", "nan"});
            continue;
        }
        qic::RateRegion2D reg = mode == "strong" ? qic::strong_capacity(ch, ds, &rep)
                                                 : qic::vsi_capacity(ch, ds, &rep);
        char name[64];
        std::snprintf(name, sizeof name, "theta_%.4f.csv", theta);
        std::string path = out_dir + "/" + name;
        emit_region_csv(path, reg);
        ctx.write_for(path);
        summary.add({fmt_num(theta), "1", fmt_num(reg.xmax), fmt_num(reg.ymax),
                     fmt_num(max_sum_rate(reg))});
    }
    write_csv(summary);
    ctx.write_for(summary.path);
    return 0;
}

// --- gaussian command ---

qic::RateRegion2D gauss_mac_region(double snr, double inr) {
    qic::HalfspaceSystem sys;
    sys.vars = {"R1", "R2"};
    sys.add_row({1.0, 0.0}, qic::gauss_cap(snr));
    sys.add_row({0.0, 1.0}, qic::gauss_cap(inr));
    sys.add_row({1.0, 1.0}, qic::gauss_cap(snr + inr));
    return qic::to_region2d(sys);
}

int cmd_gaussian(double snr1, double snr2, double inr1, double inr2, double split_step,
                 const std::string& out_dir, RunContext& ctx) {
    if (snr1 < 0 || snr2 < 0 || inr1 < 0 || inr2 < 0)
        throw qic::input_error("gaussian: parameters must be nonnegative");
    std::filesystem::create_directories(out_dir);
    qic::GaussianIc ic{snr1, snr2, inr1, inr2};
    auto splits = qic::gauss_split_grid(split_step);
    ctx.params["snr1"] = snr1;
    ctx.params["snr2"] = snr2;
    ctx.params["inr1"] = inr1;
    ctx.params["inr2"] = inr2;
    ctx.params["split_step"] = split_step;

    // Receiver pentagons: each receiver sees its own sender at snr and the
    // other at inr.
    qic::RateRegion2D mac1 = gauss_mac_region(ic.snr1, ic.inr1);
    qic::RateRegion2D mac2 = gauss_mac_region(ic.inr2, ic.snr2);
    emit_region_csv(out_dir + "/mac1.csv", mac1);
    ctx.write_for(out_dir + "/mac1.csv");
    emit_region_csv(out_dir + "/mac2.csv", mac2);
    ctx.write_for(out_dir + "/mac2.csv");

    qic::RateRegion2D hk = qic::gaussian_hk(ic, splits);
    emit_region_csv(out_dir + "/hk.csv", hk);
    ctx.write_for(out_dir + "/hk.csv");

    auto sd_rs = qic::gaussian_sd_rs(ic, splits);
    {
        CsvFile csv;
        csv.path = out_dir + "/sd_rs.csv";
        csv.header = "lambda1,lambda2,R1,R2";
        for (std::size_t i = 0; i < sd_rs.size(); ++i)
            csv.add_nums({splits[i].l1, splits[i].l2, sd_rs[i].r1, sd_rs[i].r2});
        write_csv(csv);
        ctx.write_for(csv.path);
    }

    auto sd_pts = qic::gaussian_sd_points(ic);
    {
        CsvFile csv;
        csv.path = out_dir + "/sd_points.csv";
        csv.header = "label,R1,R2";
        for (std::size_t i = 0; i < sd_pts.size(); ++i)
            csv.add({"P" + std::to_string(i + 1), fmt_num(sd_pts[i].r1), fmt_num(sd_pts[i].r2)});
        write_csv(csv);
        ctx.write_for(csv.path);
    }

    // Inclusion check: every SD+RS point inside the HK region.
    double worst = 0.0;
    bool inside = true;
    for (const auto& pt : sd_rs) {
        if (!qic::contains(hk, pt.r1, pt.r2, 1e-6)) inside = false;
        double h = qic::frontier_height(hk, pt.r1);
        worst = std::max(worst, pt.r2 - h);
    }

    // Frontier gap between the HK region and the hull of the SD+RS points.
    std::vector<std::array<double, 2>> pts;
    pts.reserve(sd_rs.size());
    for (const auto& pt : sd_rs) pts.push_back({pt.r1, pt.r2});
    qic::RateRegion2D sd_region = qic::detail::region_from_points(pts);
    double gap_max = 0.0, gap_sum = 0.0;
    int gap_n = 101;
    for (int i = 0; i < gap_n; ++i) {
        double x = hk.empty ? 0.0 : hk.xmax * i / (gap_n - 1);
        double gap = qic::frontier_height(hk, x) - qic::frontier_height(sd_region, x);
        gap_max = std::max(gap_max, gap);
        gap_sum += gap;
    }

    json rep;
    rep["sd_rs_inside_hk"] = inside;
    rep["max_inclusion_violation"] = std::max(0.0, worst);
    rep["frontier_gap_max"] = gap_max;
    rep["frontier_gap_mean"] = gap_sum / gap_n;
    std::ofstream out(out_dir + "/summary.json", std::ios::binary);
    if (!out) throw qic::input_error("cannot open summary.json");
    out << rep.dump(2) << "\n";
    out.close();
    ctx.write_for(out_dir + "/summary.json", rep);
    std::cout << rep.dump(2) << "\n";
    return 0;
}

// --- simulate command ---

int cmd_simulate(const ChannelArgs& chan, const DistArgs& dists, int receiver,
                 const std::string& n_list, double rate_frac, double sum_frac, double rate1,
                 double rate2, double delta, int trials, std::uint64_t seed,
                 const std::string& out_path, RunContext& ctx) {
    qic::Channel ch = chan.resolve();
    qic::CcqMac mac = mac_for_region(ch, receiver);
    if (mac.senders() != 2) throw qic::input_error("simulate: needs a two-sender MAC");
    auto p1 = dists.get(0, mac.alphabets()[0]);
    auto p2 = dists.get(1, mac.alphabets()[1]);

    qic::CqEnsemble ens = qic::mac2_ensemble(mac, p1, p2);
    double i1 = qic::mutual_info(ens, {"X"}, {"Y"});
    double i2 = qic::mutual_info(ens, {"Y"}, {"X"});
    double isum = qic::mutual_info(ens, {"X", "Y"}, {});

    qic::DecoderExperiment cfg{mac, p1, p2};
    cfg.n_list = parse_int_list(n_list);
    cfg.delta = delta;
    cfg.trials = trials;
    cfg.seed = seed;
    if (rate1 >= 0.0 || rate2 >= 0.0) {
        if (rate1 < 0.0 || rate2 < 0.0)
            throw qic::input_error("simulate: --rate1 and --rate2 must be given together");
        cfg.rate1 = rate1;
        cfg.rate2 = rate2;
    } else if (sum_frac >= 0.0) {
        cfg.rate1 = sum_frac * isum / 2.0;
        cfg.rate2 = sum_frac * isum / 2.0;
    } else {
        cfg.rate1 = rate_frac * i1;
        cfg.rate2 = rate_frac * i2;
    }

    ctx.params["dist1"] = p1;
    ctx.params["dist2"] = p2;
    ctx.params["receiver"] = receiver;
    ctx.params["rate1"] = cfg.rate1;
    ctx.params["rate2"] = cfg.rate2;
    ctx.params["delta"] = delta;
    ctx.params["trials"] = trials;
    ctx.params["pentagon"] = json{{"i1", i1}, {"i2", i2}, {"isum", isum}};

    qic::ErrorCurve curve = qic::run_experiment(cfg);

    CsvFile csv;
    csv.path = out_path;
    csv.header = "n,mean_error,ci_low,ci_high";
    json sizes = json::array();
    for (const auto& row : curve.rows) {
        csv.add({std::to_string(row.n), fmt_num(row.mean_error), fmt_num(row.ci_low),
                 fmt_num(row.ci_high)});
        sizes.push_back(json{{"n", row.n}, {"size1", row.size1}, {"size2", row.size2}});
    }
    write_csv(csv);
    ctx.params["codebook_sizes"] = sizes;
    ctx.write_for(out_path);
    for (const auto& row : curve.rows)
        std::cout << "n=" << row.n << " mean_error=" << fmt_num(row.mean_error) << " ci=["
                  << fmt_num(row.ci_low) << "," << fmt_num(row.ci_high) << "]\n";
    return 0;
}

// --- selftest command ---

struct TestCase {
    std::string name;
    bool passed = false;
    std::string message;
};

int run_selftest(const std::string& suite, const std::string& out_path, RunContext& ctx) {
    std::vector<TestCase> cases;
    auto record = [&](const std::string& name, bool ok, const std::string& msg) {
        cases.push_back({name, ok, msg});
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
        if (!ok && !msg.empty()) std::cout << " : " << msg;
        std::cout << "\n";
    };

    if (suite == "operator-inequalities") {
        auto hn = qic::check_hayashi_nagaoka(200, 16);
        record("hayashi-nagaoka", hn.min_slack >= -1e-8,
               "min_slack=" + fmt_num(hn.min_slack));
        auto ge = qic::check_gentle(500);
        record("gentle-measurement", ge.min_slack >= -1e-9,
               "min_slack=" + fmt_num(ge.min_slack));
        auto tr = qic::check_trace_ineq(500);
        record("trace-inequality", tr.min_slack >= -1e-9,
               "min_slack=" + fmt_num(tr.min_slack));
    } else if (suite == "entropy-identities") {
        double worst_chain = 0.0, worst_cmi = 0.0, worst_min = 0.0, worst_op = 0.0;
        for (int t = 0; t < 1000; ++t) {
            qic::Rng rng = qic::Rng::derived(0xe57u, static_cast<std::uint64_t>(t));
            int regs = 2 + static_cast<int>(rng.below(2));
            int dim = 2 + static_cast<int>(rng.below(3));
            std::vector<qic::CqEnsemble::Register> rs;
            int total = 1;
            for (int r = 0; r < regs; ++r) {
                int a = 2 + static_cast<int>(rng.below(2));
                total *= a;
                rs.push_back({"S" + std::to_string(r + 1), rng.dirichlet(a)});
            }
            std::vector<qic::Mat> states;
            states.reserve(total);
            for (int i = 0; i < total; ++i) states.push_back(qic::detail::random_density(dim, rng));
            qic::CqEnsemble ens(rs, std::move(states));

            std::vector<std::string> names;
            for (const auto& r : rs) names.push_back(r.name);

            // chain rule: I(S1S2;B) = I(S1;B) + I(S2;B|S1)
            double lhs = qic::mutual_info(ens, {names[0], names[1]}, {});
            double rhs = qic::mutual_info(ens, {names[0]}, {}) +
                         qic::mutual_info(ens, {names[1]}, {names[0]});
            worst_chain = std::max(worst_chain, std::abs(lhs - rhs));

            for (int r = 0; r < regs; ++r) {
                std::vector<std::string> rest;
                for (int o = 0; o < regs; ++o)
                    if (o != r) rest.push_back(names[o]);
                worst_cmi = std::max(worst_cmi, -qic::mutual_info(ens, {names[r]}, rest));
            }

            double h = qic::cond_entropy(ens, names);
            double hmin = qic::cond_min_entropy(ens, names);
            worst_min = std::max(worst_min, hmin - h);

            // operator form: every conditional state sits below 2^{-Hmin} I
            double cap = std::exp2(-hmin);
            auto pos = ens.positions(names);
            std::vector<int> arity;
            for (const auto& r : rs) arity.push_back(static_cast<int>(r.probs.size()));
            for (std::size_t flat = 0; flat < static_cast<std::size_t>(total); ++flat) {
                auto vals = qic::unflatten_index(flat, arity);
                qic::Mat rho = ens.averaged_state(pos, vals);
                double top = qic::eigvals_h(rho).maxCoeff();
                worst_op = std::max(worst_op, top - cap);
            }
        }
        record("chain-rule", worst_chain <= 1e-9, "residual=" + fmt_num(worst_chain));
        record("cmi-nonnegative", worst_cmi <= 1e-9, "violation=" + fmt_num(worst_cmi));
        record("minentropy-below-entropy", worst_min <= 1e-9, "excess=" + fmt_num(worst_min));
        record("minentropy-operator-bound", worst_op <= 1e-9, "excess=" + fmt_num(worst_op));
    } else if (suite == "region-nesting") {
        qic::DistSampler ds = qic::DistSampler::grid_sampler(0.25);
        for (int t = 0; t < 10; ++t) {
            qic::Rng rng = qic::Rng::derived(0x4e57u, static_cast<std::uint64_t>(t));
            std::vector<qic::Mat> states;
            for (int i = 0; i < 4; ++i) states.push_back(qic::detail::random_density(4, rng));
            qic::CcqqChannel ch({2, 2}, {2, 2}, states);

            auto dists = ds.sample(2, 2);
            qic::RateRegion2D sim = qic::sim_inner_bound(ch, ds);
            std::vector<qic::HkInput> inputs;
            for (const auto& [p1, p2] : dists)
                for (auto& hk : qic::hk_canonical_inputs(p1, p2)) inputs.push_back(std::move(hk));
            qic::RateRegion2D hk = qic::hk_hull(ch, inputs);
            qic::RateRegion2D sato = qic::sato_outer(ch, ds);

            bool ok = true;
            std::string msg;
            for (const auto& [p1, p2] : dists)
                for (const auto& pt : qic::sd_points(ch, p1, p2))
                    if (!qic::contains(sim, pt.r1, pt.r2, 1e-7)) {
                        ok = false;
                        msg = "sd point outside sim_inner";
                    }
            if (!sim.empty)
                for (const auto& pt : sim.frontier)
                    if (!qic::contains(hk, pt[0], pt[1], 1e-7)) {
                        ok = false;
                        msg = "sim_inner outside hk hull";
                    }
            if (!hk.empty)
                for (const auto& pt : hk.frontier)
                    if (!qic::contains(sato, pt[0], pt[1], 1e-7)) {
                        ok = false;
                        msg = "hk hull outside sato";
                    }
            record("nesting-channel-" + std::to_string(t), ok, msg);
        }
    } else {
        throw qic::input_error("unknown selftest suite: " + suite);
    }

    int failures = 0;
    for (const auto& c : cases)
        if (!c.passed) ++failures;

    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw qic::input_error("cannot open report file: " + out_path);
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out << "<testsuite name=\"" << suite << "\" tests=\"" << cases.size() << "\" failures=\""
            << failures << "\">\n";
        for (const auto& c : cases) {
            out << "  <testcase name=\"" << c.name << "\"";
            if (c.passed) {
                out << "/>\n";
            } else {
                out << ">\n    <failure message=\"" << c.message << "\"/>\n  </testcase>\n";
            }
        }
        out << "</testsuite>\n";
        ctx.write_for(out_path);
    }
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"classical communication over quantum interference channels"};
    app.set_version_flag("--version", std::string(qic::version()));
    app.require_subcommand(1);

    RunContext ctx;
    ctx.command_line = join_args(argc, argv);

    // entropy
    auto* sc_entropy = app.add_subcommand("entropy", "report entropies and informations as JSON");
    ChannelArgs en_chan;
    DistArgs en_dists;
    std::string en_out;
    en_chan.attach(sc_entropy);
    en_dists.attach(sc_entropy);
    sc_entropy->add_option("--out", en_out, "also write the JSON to a file");

    // check-interference
    auto* sc_check = app.add_subcommand("check-interference", "test interference conditions");
    ChannelArgs ck_chan;
    std::string ck_mode = "very-strong";
    double ck_step = 0.02;
    std::uint64_t ck_seed = 7;
    std::string ck_out;
    ck_chan.attach(sc_check);
    sc_check->add_option("--mode", ck_mode, "very-strong or strong")
        ->check(CLI::IsMember({"very-strong", "strong"}));
    sc_check->add_option("--grid-step", ck_step, "distribution grid step");
    sc_check->add_option("--seed", ck_seed, "sampler seed for non-binary alphabets");
    sc_check->add_option("--out", ck_out, "also write the JSON to a file");

    // region
    auto* sc_region = app.add_subcommand("region", "compute a rate region artifact");
    ChannelArgs rg_chan;
    DistArgs rg_dists;
    SamplerArgs rg_sampler;
    RegionArgs rg_args;
    rg_chan.attach(sc_region);
    rg_dists.attach(sc_region);
    rg_sampler.attach(sc_region);
    sc_region
        ->add_option("--method", rg_args.method,
                     "mac2|mac3|min-entropy|sim-inner|vsi|strong|hk|sato|sd-points|gauss-sd-rs|gauss-hk")
        ->required()
        ->check(CLI::IsMember({"mac2", "mac3", "min-entropy", "sim-inner", "vsi", "strong", "hk",
                               "sato", "sd-points", "gauss-sd-rs", "gauss-hk"}));
    sc_region->add_option("--out", rg_args.out, "output CSV path")->required();
    sc_region->add_option("--receiver", rg_args.receiver, "receiver for induced MAC methods");
    sc_region->add_option("--perm", rg_args.perm, "role permutation for min-entropy rows");
    sc_region->add_option("--hk-count", rg_args.hk_count, "extra random HK inputs");
    sc_region->add_option("--hk-seed", rg_args.hk_seed, "seed for random HK inputs");
    sc_region->add_option("--cond-step", rg_args.cond_step, "condition-check grid step");
    sc_region->add_option("--snr1", rg_args.snr1, "Gaussian snr1");
    sc_region->add_option("--snr2", rg_args.snr2, "Gaussian snr2");
    sc_region->add_option("--inr1", rg_args.inr1, "Gaussian inr1");
    sc_region->add_option("--inr2", rg_args.inr2, "Gaussian inr2");
    sc_region->add_option("--split-step", rg_args.split_step, "rate-splitting grid step");

    // sweep-theta
    auto* sc_sweep = app.add_subcommand("sweep-theta", "capacity regions along the swap angle");
    double sw_from = 0.0, sw_to = 0.0, sw_step = 0.05;
    std::string sw_mode = "very-strong";
    SamplerArgs sw_sampler;
    double sw_cond = 0.02;
    std::string sw_dir;
    sc_sweep->add_option("--from", sw_from, "start angle, radians")->required();
    sc_sweep->add_option("--to", sw_to, "end angle, radians")->required();
    sc_sweep->add_option("--step", sw_step, "angle step");
    sc_sweep->add_option("--mode", sw_mode, "very-strong or strong")
        ->check(CLI::IsMember({"very-strong", "strong"}));
    sw_sampler.attach(sc_sweep);
    sc_sweep->add_option("--cond-step", sw_cond, "condition-check grid step");
    sc_sweep->add_option("--out-dir", sw_dir, "output directory")->required();

    // gaussian
    auto* sc_gauss = app.add_subcommand("gaussian", "Gaussian interference figure data");
    double gs_snr1 = 0.0, gs_snr2 = 0.0, gs_inr1 = 0.0, gs_inr2 = 0.0, gs_split = 0.05;
    std::string gs_dir;
    sc_gauss->add_option("--snr1", gs_snr1, "direct snr, receiver 1")->required();
    sc_gauss->add_option("--snr2", gs_snr2, "direct snr, receiver 2")->required();
    sc_gauss->add_option("--inr1", gs_inr1, "interference at receiver 1")->required();
    sc_gauss->add_option("--inr2", gs_inr2, "interference at receiver 2")->required();
    sc_gauss->add_option("--split-step", gs_split, "rate-splitting grid step");
    sc_gauss->add_option("--out-dir", gs_dir, "output directory")->required();

    // simulate
    auto* sc_sim = app.add_subcommand("simulate", "Monte Carlo decoder error curve");
    ChannelArgs sm_chan;
    DistArgs sm_dists;
    int sm_receiver = 1;
    std::string sm_n = "4,6,8,10";
    double sm_rate_frac = 0.5, sm_sum_frac = -1.0, sm_rate1 = -1.0, sm_rate2 = -1.0;
    double sm_delta = 0.05;
    int sm_trials = 20;
    std::uint64_t sm_seed = 7;
    std::string sm_out;
    sm_chan.attach(sc_sim);
    sm_dists.attach(sc_sim);
    sc_sim->add_option("--receiver", sm_receiver, "receiver whose MAC is simulated");
    sc_sim->add_option("--n", sm_n, "comma-separated blocklengths");
    sc_sim->add_option("--rate-frac", sm_rate_frac, "fraction of each pentagon bound");
    sc_sim->add_option("--sum-frac", sm_sum_frac, "fraction of the sum bound, split evenly");
    sc_sim->add_option("--rate1", sm_rate1, "explicit rate for sender 1");
    sc_sim->add_option("--rate2", sm_rate2, "explicit rate for sender 2");
    sc_sim->add_option("--delta", sm_delta, "typicality width");
    sc_sim->add_option("--trials", sm_trials, "codebook draws per blocklength");
    sc_sim->add_option("--seed", sm_seed, "experiment seed");
    sc_sim->add_option("--out", sm_out, "output CSV path")->required();

    // selftest
    auto* sc_self = app.add_subcommand("selftest", "run a property suite");
    std::string st_suite, st_out;
    sc_self->add_option("--suite", st_suite, "operator-inequalities|entropy-identities|region-nesting")
        ->required()
        ->check(CLI::IsMember({"operator-inequalities", "entropy-identities", "region-nesting"}));
    sc_self->add_option("--out", st_out, "JUnit-style XML report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sc_entropy->parsed()) {
            ctx.seed = 0;
            return cmd_entropy(en_chan, en_dists, en_out, ctx);
        }
        if (sc_check->parsed()) {
            ctx.seed = ck_seed;
            ctx.params["mode"] = ck_mode;
            ctx.params["grid_step"] = ck_step;
            return cmd_check_interference(ck_chan, ck_mode, ck_step, ck_seed, ck_out, ctx);
        }
        if (sc_region->parsed()) {
            ctx.seed = rg_sampler.seed;
            return cmd_region(rg_chan, rg_dists, rg_sampler, rg_args, ctx);
        }
        if (sc_sweep->parsed()) {
            ctx.seed = sw_sampler.seed;
            ctx.params["from"] = sw_from;
            ctx.params["to"] = sw_to;
            ctx.params["step"] = sw_step;
            return cmd_sweep_theta(sw_from, sw_to, sw_step, sw_mode, sw_sampler, sw_cond, sw_dir,
                                   ctx);
        }
        if (sc_gauss->parsed()) {
            ctx.seed = 0;
            return cmd_gaussian(gs_snr1, gs_snr2, gs_inr1, gs_inr2, gs_split, gs_dir, ctx);
        }
        if (sc_sim->parsed()) {
            ctx.seed = sm_seed;
            return cmd_simulate(sm_chan, sm_dists, sm_receiver, sm_n, sm_rate_frac, sm_sum_frac,
                                sm_rate1, sm_rate2, sm_delta, sm_trials, sm_seed, sm_out, ctx);
        }
        if (sc_self->parsed()) {
            ctx.seed = 0;
            ctx.params["suite"] = st_suite;
            return run_selftest(st_suite, st_out, ctx);
        }
        throw qic::input_error("no subcommand selected");
    } catch (const qic::input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const qic::budget_error& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 3;
    } catch (const qic::property_error& e) {
        std::cerr << "property failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
