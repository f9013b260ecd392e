#include <stdio.h>

typedef void (*func_ptr_void)(const char *);
typedef int (*func_ptr_int)(const char *);

void function(const char *message) {
    printf("This is a message: %s\n", message);
}

int main(void) {
    func_ptr_void original_func = function;
    func_ptr_int casted_func = (func_ptr_int) original_func;
    original_func("No problem with the direct call");
    casted_func("Bomb!");
    return 0;
}
