#include "recomp/subprocess.hpp"

#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "recomp/errors.hpp"

extern char** environ;

namespace recomp {

namespace {

struct Pipe {
    int fds[2] = {-1, -1};
    Pipe() {
        if (pipe(fds) != 0) throw Error(Errc::Io, std::string("pipe: ") + strerror(errno));
    }
    ~Pipe() {
        if (fds[0] >= 0) close(fds[0]);
        if (fds[1] >= 0) close(fds[1]);
    }
    void close_read() { close(fds[0]); fds[0] = -1; }
    void close_write() { close(fds[1]); fds[1] = -1; }
};

std::string drain_fd(int fd) {
    std::string out;
    char buf[16384];
    ssize_t n;
    while ((n = read(fd, buf, sizeof buf)) > 0) out.append(buf, static_cast<size_t>(n));
    return out;
}

} // namespace

RunResult run_process(const std::vector<std::string>& argv,
                      const std::optional<std::filesystem::path>& stdout_file) {
    if (argv.empty()) throw Error(Errc::Io, "empty argv");

    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const std::string& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    Pipe err_pipe;
    std::optional<Pipe> out_pipe;
    int out_fd = -1;
    if (stdout_file) {
        out_fd = open(stdout_file->c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        if (out_fd < 0)
            throw Error(Errc::Io, "cannot open " + stdout_file->string() + ": " + strerror(errno));
    } else {
        out_pipe.emplace();
    }

    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_adddup2(&fa, err_pipe.fds[1], STDERR_FILENO);
    if (out_fd >= 0) posix_spawn_file_actions_adddup2(&fa, out_fd, STDOUT_FILENO);
    else posix_spawn_file_actions_adddup2(&fa, out_pipe->fds[1], STDOUT_FILENO);

    pid_t pid = -1;
    int rc = posix_spawnp(&pid, cargv[0], &fa, nullptr, cargv.data(), environ);
    posix_spawn_file_actions_destroy(&fa);
    if (out_fd >= 0) close(out_fd);
    err_pipe.close_write();
    if (out_pipe) out_pipe->close_write();
    if (rc != 0)
        throw Error(Errc::Io, "cannot spawn '" + argv[0] + "': " + strerror(rc));

    RunResult result;
    // stdout first when piped: the child blocks on stdout before stderr fills
    if (out_pipe) result.output = drain_fd(out_pipe->fds[0]);
    result.error = drain_fd(err_pipe.fds[0]);

    int status = 0;
    while (waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR) throw Error(Errc::Io, std::string("waitpid: ") + strerror(errno));
    }
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
    return result;
}

} // namespace recomp
