import platform

import psutil


def hardware_info():
    """Returns hardware information.

    Returns:
        dict: CPU counts, total memory in bytes and the platform string.
    """
    memory = psutil.virtual_memory()
    return {
        'platform': platform.platform(),
        'python': platform.python_version(),
        'cpu': {
            'logical': psutil.cpu_count(),
            'physical': psutil.cpu_count(logical=False),
        },
        'ram': {
            'total': memory.total,
        },
    }


def hardware_summary() -> str:
    info = hardware_info()
    return (f"platform={info['platform']} python={info['python']} cpus={info['cpu']['logical']} "
            f"cores={info['cpu']['physical']} ram_bytes={info['ram']['total']}")
