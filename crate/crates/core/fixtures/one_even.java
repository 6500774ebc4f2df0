int[] arr = INTARRAY(list(5), range(1, 100));
int idx = INT(range(0, 4));
ASSERTBLOCK();
{
	ASSERT((arr[idx] % 2) == 0);
	ASSERT(__distinct(arr, 5));
	LOOP(list(5));
	for (int i = 0; i < arr.length; i++) {
		ASSERT(__impl(i != idx, (arr[i] % 2) == 1));
	}
}
arr[idx] /= 2;
arr[idx] *= 2;
