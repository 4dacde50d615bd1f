"""Order-stable parallel map capped by the ``STEINPA_THREADS`` environment variable."""
import os
from concurrent.futures import ThreadPoolExecutor


def thread_count():
    raw = os.environ.get("STEINPA_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"STEINPA_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def ordered_map(fn, items, threads=None):
    """``[fn(x) for x in items]`` run on a thread pool; output order matches input.

    The heavy kernels release the GIL, so threads give real parallelism.
    """
    items = list(items)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))
