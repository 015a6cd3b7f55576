// Batch front end: validates documents and runs the index, normalize,
// coarse, and k1 computations with machine-readable certificates.
//
// Exit codes: 0 success, 1 I/O failure, 2 schema error, 3 semantic error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "qcalab/json_io.hpp"

namespace {

using namespace qcalab;
using qcalab::io::json;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitSchema = 2;
constexpr int kExitSemantic = 3;

struct SemanticError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json read_document_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw io::SchemaError(std::string("not valid JSON: ") + e.what());
    }
    return j;
}

io::Document read_document(const std::string& path, const std::string& expected_kind) {
    io::Document d = io::document_from_json(read_document_json(path));
    if (!expected_kind.empty() && d.kind != expected_kind)
        throw io::SchemaError("expected a " + expected_kind + " document, got " + d.kind);
    return d;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

// Full-fidelity homomorphism check: the stored leg images must satisfy the
// algebra relations, and the document's unit table must agree with the
// products of the leg images (a corrupted table can hide relations that the
// leg contraction alone would miss).
std::vector<std::string> validate_homo_document(const io::Document& d, const Homo& h) {
    std::vector<std::string> report = verify(h);
    const json& im = d.payload.at("images");
    for (int x = 0; x < h.source().sites(); ++x) {
        std::int64_t qx = h.source().dim(x);
        if (qx == 1) continue;
        const json& site = im.at(std::to_string(x));
        for (std::int64_t i = 0; i < qx; ++i)
            for (std::int64_t k = 0; k < qx; ++k) {
                Element given = io::element_body_from_json(
                    site.at(std::to_string(i) + "," + std::to_string(k)), h.target(), d.field);
                if (!elements_equal(given, h.unit_image(x, i, k)))
                    report.push_back("unit table is not multiplicative across legs at site " +
                                     std::to_string(x));
            }
    }
    return report;
}

int cmd_validate(const std::string& path) {
    io::Document d = read_document(path, "");
    json out;
    out["kind"] = d.kind;
    out["field"] = d.field.to_string();
    if (d.kind == "space") {
        io::space_from_json(d.payload);
    } else if (d.kind == "system") {
        io::system_from_json(d.payload);
    } else if (d.kind == "element") {
        SpinSystem sys = io::system_from_json(d.payload.at("system"));
        io::element_body_from_json(d.payload, sys, d.field);
    } else if (d.kind == "matrix") {
        io::matrix_from_json(d.payload, d.field);
    } else if (d.kind == "chain0") {
        io::space_from_json(d.payload.at("space"));
        io::chain0_from_json(d.payload);
    } else if (d.kind == "chain1") {
        io::space_from_json(d.payload.at("space"));
        Chain1 c = io::chain1_from_json(d.payload);
        if (!c.respects_bound(*io::space_from_json(d.payload.at("space"))))
            throw SemanticError("chain1 pairs violate the propagation bound");
    } else if (d.kind == "homo") {
        Homo h = io::homo_from_json(d.payload, d.field);
        auto report = validate_homo_document(d, h);
        if (!report.empty()) {
            out["violations"] = report;
            emit(out);
            throw SemanticError("homomorphism relations violated");
        }
        out["spread"] = io::rational_str(h.spread());
    } else {
        throw io::SchemaError("unknown document kind: " + d.kind);
    }
    out["valid"] = true;
    emit(out);
    return kExitOk;
}

int cmd_index(const std::string& path, int gamma, int radius, bool all_cuts) {
    io::Document d = read_document(path, "homo");
    Homo h = io::homo_from_json(d.payload, d.field);
    if (!verify(h).empty()) throw SemanticError("input is not a homomorphism");
    const MetricSpace& space = *h.source().space;
    json out;
    if (!all_cuts) {
        AzClass cls = index(h, Cut{gamma, radius});
        out = io::az_class_to_json(cls);
    } else {
        std::vector<int> gammas;
        if (space.kind() == MetricSpace::Kind::Circle) {
            for (int g = 0; g < space.size(); ++g) gammas.push_back(g);
        } else {
            for (int g = radius - 1; g <= space.size() - 1 - 2 * radius; ++g) gammas.push_back(g);
        }
        if (gammas.empty()) throw SemanticError("no valid cut at this radius");
        json cuts = json::object();
        std::optional<Rational> common;
        bool independent = true;
        for (int g : gammas) {
            AzClass cls = index(h, Cut{g, radius});
            cuts[std::to_string(g)] = io::az_class_to_json(cls, false);
            if (!common) common = cls.value;
            else if (*common != cls.value) independent = false;
        }
        out["cuts"] = std::move(cuts);
        out["independent"] = independent;
        if (independent) out["index"] = io::rational_str(*common);
    }
    emit(out);
    return kExitOk;
}

int cmd_normalize(const std::string& path) {
    io::Document d = read_document(path, "homo");
    Homo h = io::homo_from_json(d.payload, d.field);
    if (!verify(h).empty()) throw SemanticError("input is not a homomorphism");
    ShiftNormalization norm;
    try {
        norm = normalize_to_shift(h);
    } catch (const std::exception& e) {
        throw SemanticError(e.what());
    }
    json out;
    out["sigma"] = io::homo_to_json(norm.sigma);
    out["f"] = io::homo_to_json(norm.f);
    json transport = json::object();
    for (const auto& [p, moves] : norm.transport) {
        json list = json::array();
        for (const auto& m : moves) list.push_back({m.origin_site, m.origin_leg, m.assigned_site});
        transport[std::to_string(p)] = std::move(list);
    }
    out["transport"] = std::move(transport);
    out["spread_f"] = io::rational_str(norm.spread_f);
    out["spread_sigma"] = io::rational_str(norm.spread_sigma);
    emit(out);
    return kExitOk;
}

int cmd_coarse(const std::string& mode, const std::vector<std::string>& inputs,
               const std::string& bound) {
    json out;
    if (mode == "deg" || mode == "class") {
        if (inputs.size() != 1) throw io::SchemaError("coarse " + mode + " takes one system file");
        io::Document d = read_document(inputs[0], "system");
        SpinSystem q = io::system_from_json(d.payload);
        if (mode == "deg") {
            out["deg"] = {{"space", io::space_to_json(*q.space)},
                          {"sites", io::chain0_to_json(deg(q)).at("sites")}};
        } else {
            out["class"] = io::prime_vector_to_json(ch0_bounded(q));
        }
    } else if (mode == "homologous") {
        if (inputs.size() != 2)
            throw io::SchemaError("coarse homologous takes two chain0 files");
        if (bound.empty()) throw io::SchemaError("coarse homologous requires --bound");
        io::Document da = read_document(inputs[0], "chain0");
        io::Document db = read_document(inputs[1], "chain0");
        if (da.payload.at("space") != db.payload.at("space"))
            throw SemanticError("chains live on different spaces");
        SpacePtr sp = io::space_from_json(da.payload.at("space"));
        Chain0 a = io::chain0_from_json(da.payload);
        Chain0 b = io::chain0_from_json(db.payload);
        Rational l = io::parse_rational(bound);
        LHomologousResult res = l_homologous(a, b, l, sp);
        out["homologous"] = res.homologous;
        if (res.homologous) {
            out["certificate"] = io::chain1_to_json(res.certificate);
        } else {
            out["obstruction"] = {{"prime", res.obstruction->prime},
                                  {"component", res.obstruction->component},
                                  {"sum_a", res.obstruction->sum_a},
                                  {"sum_b", res.obstruction->sum_b}};
        }
    } else {
        throw io::SchemaError("unknown coarse mode: " + mode + " (use deg | class | homologous)");
    }
    emit(out);
    return kExitOk;
}

int cmd_k1(const std::string& path, std::int64_t size) {
    io::Document d = read_document(path, "matrix");
    Mat m = io::matrix_from_json(d.payload, d.field);
    if (size == 0) size = m.rows();
    RationalizedUnits cls;
    try {
        cls = k1_class(m, size);
    } catch (const std::exception& e) {
        throw SemanticError(e.what());
    }
    json out;
    out["class"] = io::units_to_json(cls);
    emit(out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact-arithmetic toolbox for quantum cellular automata on finite spaces"};
    app.require_subcommand(1);

    std::string file;
    auto* validate = app.add_subcommand("validate", "check a document against its schema");
    validate->add_option("file", file, "document to check")->required();

    std::string index_file;
    int gamma = 0, radius = 1;
    bool all_cuts = false;
    auto* index_cmd = app.add_subcommand("index", "boundary index of a QCA at a cut");
    index_cmd->add_option("file", index_file, "homo document")->required();
    index_cmd->add_option("--cut", gamma, "cut position (edge between cut and cut+1)");
    index_cmd->add_option("--radius", radius, "window radius, at least the spread")->required();
    index_cmd->add_flag("--all-cuts", all_cuts, "compute every cut and assert independence");

    std::string norm_file;
    auto* norm_cmd = app.add_subcommand("normalize", "factor a QCA as circuit x shift");
    norm_cmd->add_option("file", norm_file, "homo document")->required();

    std::string coarse_mode, bound;
    std::vector<std::string> coarse_inputs;
    auto* coarse_cmd = app.add_subcommand("coarse", "degree chains and the l-homologous decision");
    coarse_cmd->add_option("mode", coarse_mode, "deg | class | homologous")->required();
    coarse_cmd->add_option("inputs", coarse_inputs, "input documents")->required();
    coarse_cmd->add_option("--bound", bound, "propagation bound l (rational)");

    std::string k1_file;
    std::int64_t k1_size = 0;
    auto* k1_cmd = app.add_subcommand("k1", "rationalized determinant class of a matrix");
    k1_cmd->add_option("file", k1_file, "matrix document")->required();
    k1_cmd->add_option("--size", k1_size, "declared size n of f_n (defaults to the matrix size)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(file);
        if (index_cmd->parsed()) return cmd_index(index_file, gamma, radius, all_cuts);
        if (norm_cmd->parsed()) return cmd_normalize(norm_file);
        if (coarse_cmd->parsed()) return cmd_coarse(coarse_mode, coarse_inputs, bound);
        if (k1_cmd->parsed()) return cmd_k1(k1_file, k1_size);
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const io::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const SemanticError& e) {
        std::cerr << "semantic error: " << e.what() << "\n";
        return kExitSemantic;
    } catch (const std::invalid_argument& e) {
        std::cerr << "semantic error: " << e.what() << "\n";
        return kExitSemantic;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSemantic;
    }
    return kExitOk;
}
