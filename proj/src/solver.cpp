#include "nonterm/solver.hpp"

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "nonterm/encode.hpp"
#include "nonterm/errors.hpp"

namespace nonterm {

const char* to_string(SatStatus s) {
    switch (s) {
        case SatStatus::Satisfiable: return "satisfiable";
        case SatStatus::Unsatisfiable: return "unsatisfiable";
        default: return "unknown";
    }
}

std::string write_dimacs(const CnfInstance& inst) {
    std::string out;
    out.reserve(inst.literals.size() * 4 + inst.clause_count() * 3 + 32);
    out += "p cnf ";
    out += std::to_string(inst.variable_count);
    out += ' ';
    out += std::to_string(inst.clause_count());
    out += '\n';
    char buf[16];
    for (std::size_t i = 0; i < inst.clause_count(); ++i) {
        for (int lit : inst.clause(i)) {
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, lit);
            (void)ec;
            out.append(buf, end);
            out += ' ';
        }
        out += "0\n";
    }
    return out;
}

void write_dimacs_file(const CnfInstance& inst, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    std::string text = write_dimacs(inst);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("short write to " + path);
}

void write_variable_map(const CnfInstance& inst, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    VariableLayout layout(inst.rule, inst.state_count, inst.method == "tdas");
    for (int v = 1; v <= inst.variable_count; ++v)
        f << v << '\t' << layout.describe(v) << '\n';
    if (!f) throw IoError("short write to " + path);
}

namespace {

bool executable_at(const std::string& path) {
    return access(path.c_str(), X_OK) == 0;
}

std::optional<std::string> find_in_path(const std::string& name) {
    if (name.find('/') != std::string::npos)
        return executable_at(name) ? std::optional(name) : std::nullopt;
    const char* env = std::getenv("PATH");
    if (!env) return std::nullopt;
    std::stringstream ss(env);
    std::string dir;
    while (std::getline(ss, dir, ':')) {
        if (dir.empty()) continue;
        std::string candidate = dir + "/" + name;
        if (executable_at(candidate)) return candidate;
    }
    return std::nullopt;
}

struct TempFile {
    std::string path;
    explicit TempFile(const char* suffix) {
        std::string tmpl = "/tmp/nonterm-XXXXXX" + std::string(suffix);
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        int fd = mkstemps(buf.data(), static_cast<int>(std::strlen(suffix)));
        if (fd < 0) throw IoError("cannot create a temporary file");
        close(fd);
        path.assign(buf.data());
    }
    ~TempFile() { unlink(path.c_str()); }
    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;
};

// Runs the command with the given argv, capturing stdout.  Returns the
// exit code (negative for signals) or throws SpawnError when the
// executable cannot be started.  A positive deadline kills the child.
int run_capture(const std::vector<std::string>& argv, double timeout_seconds,
                std::string& output, bool& timed_out) {
    int out_pipe[2], err_pipe[2];
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
        throw SpawnError("pipe: " + std::string(std::strerror(errno)));
    fcntl(err_pipe[1], F_SETFD, FD_CLOEXEC);

    pid_t pid = fork();
    if (pid < 0) throw SpawnError("fork: " + std::string(std::strerror(errno)));
    if (pid == 0) {
        close(out_pipe[0]);
        close(err_pipe[0]);
        dup2(out_pipe[1], STDOUT_FILENO);
        int devnull = open("/dev/null", O_WRONLY);
        if (devnull >= 0) dup2(devnull, STDERR_FILENO);
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        int err = errno;  // exec failed: report it through the cloexec pipe
        ssize_t ignored = write(err_pipe[1], &err, sizeof err);
        (void)ignored;
        _exit(127);
    }
    close(out_pipe[1]);
    close(err_pipe[1]);

    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration<double>(timeout_seconds);
    timed_out = false;
    output.clear();
    char buf[4096];
    for (;;) {
        int wait_ms = -1;
        if (timeout_seconds > 0) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                            deadline - std::chrono::steady_clock::now())
                            .count();
            if (left <= 0) {
                timed_out = true;
                break;
            }
            wait_ms = static_cast<int>(std::min<long long>(left, 1000));
        }
        struct pollfd pfd{out_pipe[0], POLLIN, 0};
        int rc = poll(&pfd, 1, wait_ms);
        if (rc < 0 && errno != EINTR) break;
        if (rc <= 0) continue;
        ssize_t n = read(out_pipe[0], buf, sizeof buf);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        output.append(buf, static_cast<std::size_t>(n));
    }
    close(out_pipe[0]);
    if (timed_out) kill(pid, SIGKILL);

    int status = 0;
    waitpid(pid, &status, 0);

    int exec_errno = 0;
    if (read(err_pipe[0], &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
        close(err_pipe[0]);
        throw SpawnError("cannot run " + argv[0] + ": " + std::strerror(exec_errno));
    }
    close(err_pipe[0]);

    if (WIFSIGNALED(status)) return -WTERMSIG(status);
    return WEXITSTATUS(status);
}

} // namespace

std::optional<SolverCommand> discover_solver() {
    if (const char* env = std::getenv("NONTERM_SAT_SOLVER")) {
        std::stringstream ss(env);
        std::string word;
        SolverCommand cmd;
        while (ss >> word) {
            if (cmd.executable.empty())
                cmd.executable = word;
            else
                cmd.args.push_back(word);
        }
        if (!cmd.executable.empty()) return cmd;
    }
    for (const char* name : {"kissat", "cadical", "cryptominisat5", "glucose", "splr-cli"})
        if (auto found = find_in_path(name)) return SolverCommand{*found, {}};
    return std::nullopt;
}

SatResult solve_external(const CnfInstance& inst, const SolverCommand& cmd,
                         double timeout_seconds) {
    TempFile dimacs(".cnf");
    write_dimacs_file(inst, dimacs.path);

    std::vector<std::string> argv{cmd.executable};
    argv.insert(argv.end(), cmd.args.begin(), cmd.args.end());
    argv.push_back(dimacs.path);

    auto t0 = std::chrono::steady_clock::now();
    std::string output;
    bool timed_out = false;
    int exit_code = run_capture(argv, timeout_seconds, output, timed_out);
    SatResult result;
    result.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (timed_out) {
        result.detail = "timeout after " + std::to_string(timeout_seconds) + "s";
        return result;
    }

    bool says_sat = false, says_unsat = false;
    std::vector<bool> model(static_cast<std::size_t>(inst.variable_count) + 1, false);
    std::stringstream lines(output);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind("s ", 0) == 0) {
            if (line.find("UNSATISFIABLE") != std::string::npos)
                says_unsat = true;
            else if (line.find("SATISFIABLE") != std::string::npos)
                says_sat = true;
        } else if (line.rfind("v", 0) == 0 && (line.size() == 1 || line[1] == ' ')) {
            std::stringstream vs(line.substr(1));
            long long lit;
            while (vs >> lit) {
                if (lit == 0) continue;
                long long var = lit > 0 ? lit : -lit;
                if (var <= inst.variable_count) model[static_cast<std::size_t>(var)] = lit > 0;
            }
        }
    }
    if (!says_sat && !says_unsat) {
        if (exit_code == 10)
            says_sat = true;
        else if (exit_code == 20)
            says_unsat = true;
    }

    if (says_unsat) {
        result.status = SatStatus::Unsatisfiable;
    } else if (says_sat) {
        if (!model_satisfies(inst, model))
            throw ModelInconsistent(cmd.executable + " claimed a model that violates a clause");
        result.status = SatStatus::Satisfiable;
        result.model = std::move(model);
    } else {
        result.detail = "solver gave no verdict (exit " + std::to_string(exit_code) + ")";
    }
    return result;
}

} // namespace nonterm
