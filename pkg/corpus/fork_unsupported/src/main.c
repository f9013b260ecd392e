#include <stdio.h>

extern int getChild(void);

int main(void) {
    int child_pid = getChild();
    if (child_pid > 0) {
        printf("child spawned\n");
        return 0;
    }
    printf("fork() returned -1, no child process\n");
    return 1;
}
