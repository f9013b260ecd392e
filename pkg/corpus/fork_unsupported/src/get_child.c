#include <unistd.h>

int getChild(void) {
    int pid = fork();
    if (pid == 0) {
        _exit(0); /* child leaves immediately so only the parent reports */
    }
    if (pid > 0) {
        return pid;
    }
    return 0;
}
