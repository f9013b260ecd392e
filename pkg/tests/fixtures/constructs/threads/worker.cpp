#include <thread>

static void worker(int *value) { *value = 42; }

int main() {
    int value = 0;
    std::thread runner(worker, &value);
    runner.join();
    return value == 42 ? 0 : 1;
}
