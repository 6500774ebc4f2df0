@MAIN
static int[] start() {
  int[] input = INTARRAY(list(12), range(-25, 25));
  ASSERT(__distinct(input, 12));
  return mystery(input, 0, input.length - 1);
}

@REC(5)
static int[] mystery(int[] data, int from, int to) {
  if (from == to) return new int[] { data[from], data[from] };

  int[] left = mystery(data, from, (from + to) / 2);
  int[] right = mystery(data, (from + to) / 2 + 1, to);

  int r[] = new int[2];
  r[0] = left[0] < right[0] ? left[0] : right[0];
  r[1] = left[1] < right[1] ? right[1] : left[1];
  ASSERT(Math.abs(r[0] - r[1]) > 10);
  return r;
}
