def minSubArraySum(nums):
