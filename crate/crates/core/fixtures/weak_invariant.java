// The invariant says nothing about i, so models for the final assertion are
// not backed by the loop; the interpreter must reject them.
int n = INT(range(1, 50));
int i = 0;
INVARIANT(true);
while (i < n) {
  i++;
}
ASSERT(i == n + 1);
