int[] arr = new int[INT(range(6000, 10000))];
int inc = HOLE(INT(range(1, 100)));
int i = 1;
INVARIANT(i >= 1 && i <= arr.length && arr[i - 1] == (i - 1) * inc);
while (i < arr.length) {
	arr[i] = arr[i - 1] + inc;
	i++;
}
System.out.print(arr[arr.length - 1] == INT(range(60000, 100000)));
ASSERT(__out.equals("true"));
