#include <stdio.h>
#include <string.h>

int main(void) {
    char buffer[64];
    strcpy(buffer, "stack canary exercise");
    printf("%s\n", buffer);
    return 0;
}
